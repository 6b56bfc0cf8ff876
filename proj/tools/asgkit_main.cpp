// Command-line front end. Subcommands map onto the library modules:
//   exact           parent-independent closed forms
//   solve           recursion tables (CSV + binary cache)
//   diffusion       stationary ensembles and Monte Carlo estimates
//   simulate-chain  jump-chain trajectories to the MRCA
//   dirichlet-limit central/local limit measurements
//   asymptotics     convergence reports with verdict JSON
// Exit codes: 0 success, 1 validation/usage error, 2 numeric failure.
#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "asgkit/asgkit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve_out(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  if (const char* dir = std::getenv("ASGKIT_OUT_DIR")) {
    return (fs::path(dir) / path).string();
  }
  return path;
}

std::vector<double> parse_doubles(const std::string& s) {
  auto v = asgkit::parse_number_list(s);
  if (v.empty()) throw CLI::ValidationError("expected a comma-separated number list: " + s);
  return v;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_doubles(s)) out.push_back(static_cast<int>(std::llround(v)));
  return out;
}

std::vector<int> parse_grid(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos) {
    return parse_ints(s);  // explicit comma list
  }
  int start = std::stoi(s.substr(0, colon));
  int stop = std::stoi(s.substr(colon + 1));
  return asgkit::geometric_grid(start, stop);
}

struct ModelOpts {
  std::string config_path;
  bool pim = false;
  double theta = 0.0;
  std::string q_list;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "model config file (keys: d, theta, P, gamma)");
    cmd->add_flag("--pim", pim, "parent-independent model given by --theta/--q");
    cmd->add_option("--theta", theta, "mutation rate for --pim");
    cmd->add_option("--q", q_list, "mutation distribution Q for --pim, comma separated");
  }

  asgkit::ModelParams params() const {
    if (!config_path.empty()) return asgkit::load_model_config(config_path);
    if (pim) return asgkit::PimParams::validate(theta, parse_doubles(q_list)).to_model();
    throw CLI::ValidationError("provide --config or --pim with --theta/--q");
  }
};

void write_report_csv(const asgkit::ConvergenceReport& rep, std::uint64_t hash,
                      std::uint64_t seed, const std::string& path) {
  asgkit::CsvWriter w(path, hash, seed);
  w.header({"n", "observed", "target", "abs_err", "rel_err"});
  for (const auto& r : rep.rows) {
    w.line({std::to_string(r.n), asgkit::fmt_g17(r.observed), asgkit::fmt_g17(r.target),
            asgkit::fmt_g17(r.abs_err), asgkit::fmt_g17(r.rel_err)});
  }
}

json verdict_json(const asgkit::ConvergenceReport& rep, std::uint64_t hash,
                  std::uint64_t seed) {
  json v;
  v["check"] = rep.check;
  v["provenance"] = rep.provenance;
  v["params_hash"] = asgkit::hash_hex(hash);
  v["seed"] = seed;
  v["tolerance"] = rep.tolerance;
  v["final_rel_err"] = rep.final_rel_err();
  v["monotone_tail"] = rep.monotone_tail();
  v["pass"] = rep.pass();
  return v;
}

void dump_json(const json& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw asgkit::Error("cannot open output file " + path);
  out << v.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

int run_exact(const ModelOpts& model, const std::string& n_list, int pi_index,
              const std::string& y_list, int nval, const std::string& out,
              const std::string& format) {
  asgkit::ModelParams params = model.params();
  auto pim = asgkit::PimParams::from_model(params);
  if (!pim) throw asgkit::Error("exact: closed forms require neutral parent-independent parameters");
  json result;
  if (!n_list.empty()) {
    asgkit::SampleConfig n(parse_ints(n_list));
    double lp = asgkit::pim_log_p(n, *pim);
    std::cout << "log_p = " << asgkit::fmt_g17(lp) << "\n";
    std::cout << "p = " << asgkit::fmt_g17(std::exp(lp)) << "\n";
    result["log_p"] = lp;
    if (pi_index >= 1) {
      double pi = asgkit::pim_pi(pi_index - 1, n, *pim);
      std::cout << "pi[" << pi_index << "|n] = " << asgkit::fmt_g17(pi) << "\n";
      result["pi"] = pi;
    }
  }
  if (!y_list.empty()) {
    asgkit::DirectionY dir(parse_doubles(y_list));
    double la = asgkit::pim_asymptotic_log_p(nval, dir, *pim);
    std::cout << "asymptotic_log_p = " << asgkit::fmt_g17(la) << "\n";
    result["asymptotic_log_p"] = la;
  }
  if (!out.empty()) {
    std::string path = resolve_out(out);
    if (format == "json") {
      result["params_hash"] = asgkit::hash_hex(asgkit::params_hash(params));
      dump_json(result, path);
    } else {
      asgkit::CsvWriter w(path, asgkit::params_hash(params), 0);
      w.header({"key", "value"});
      for (auto& [k, v] : result.items()) w.line({k, asgkit::fmt_g17(v.get<double>())});
    }
  }
  return 0;
}

int run_solve(const ModelOpts& model, int max_size, int n_max, const std::string& policy,
              double trunc_tol, const std::string& out, const std::string& cache,
              const std::string& format) {
  asgkit::ModelParams params = model.params();
  std::uint64_t hash = asgkit::params_hash(params);
  asgkit::TruncationPolicy pol;
  pol.n_max = n_max;
  pol.closure = policy == "pim-proxy" ? asgkit::TruncationPolicy::Closure::PimProxy
                                      : asgkit::TruncationPolicy::Closure::DropBranching;
  asgkit::CacheKey key{hash, max_size, params.neutral() ? 0 : (pol.n_max ? pol.n_max : max_size + 20),
                       static_cast<std::int32_t>(pol.closure)};
  asgkit::ProbTable table;
  bool cached = false;
  if (!cache.empty()) {
    if (auto t = asgkit::read_table_cache(key, resolve_out(cache))) {
      table = *t;
      cached = true;
    }
  }
  if (!cached) {
    if (params.neutral()) {
      table = asgkit::solve_neutral(params, max_size);
    } else {
      auto sol = asgkit::solve_selection_truncated(params, max_size, pol, trunc_tol);
      table = sol.table;
      std::cout << "max_truncation_log_err = " << asgkit::fmt_g17(sol.max_log_err) << "\n";
    }
    if (!cache.empty()) asgkit::write_table_cache(table, key, resolve_out(cache));
  }
  if (!out.empty()) {
    std::string path = resolve_out(out);
    if (format == "json") {
      json rows = json::array();
      table.for_each([&](const asgkit::SampleConfig& n, double lp) {
        rows.push_back({{"n", n.counts()}, {"log_p", lp}});
      });
      dump_json(json{{"params_hash", asgkit::hash_hex(hash)}, {"rows", rows}}, path);
    } else {
      asgkit::write_prob_table_csv(table, hash, path);
    }
  }
  std::cout << "states = " << [&] {
    std::size_t c = 0;
    for (int m = 1; m <= table.max_size(); ++m) c += table.level(m).size();
    return c;
  }() << "\n";
  return 0;
}

int run_diffusion(const ModelOpts& model, long long samples, asgkit::DiffusionConfig cfg,
                  const std::vector<std::string>& estimate_p,
                  const std::vector<std::string>& estimate_k_list,
                  const std::string& density_at, double bandwidth, const std::string& out,
                  const std::string& format) {
  asgkit::ModelParams params = model.params();
  std::uint64_t hash = asgkit::params_hash(params);
  cfg.samples_per_replica =
      static_cast<int>((samples + cfg.replicas - 1) / cfg.replicas);
  asgkit::StationaryEnsemble ens = asgkit::stationary_sample(params, cfg, hash);
  json result;
  result["samples"] = ens.size();
  for (const std::string& spec : estimate_p) {
    asgkit::SampleConfig n(parse_ints(spec));
    auto e = asgkit::estimate_log_p(n, ens);
    std::cout << "log_p" << n.str() << " = " << asgkit::fmt_g17(e.log_p) << " +- "
              << asgkit::fmt_g17(e.se_log) << (e.high_variance ? "  [high variance]" : "")
              << "\n";
    result["log_p"][n.str()] = {{"value", e.log_p}, {"se", e.se_log}};
  }
  for (const std::string& spec : estimate_k_list) {
    asgkit::SampleConfig n(parse_ints(spec));
    auto e = asgkit::estimate_k(n, ens);
    std::cout << "k" << n.str() << " = " << asgkit::fmt_g17(e.value) << " +- "
              << asgkit::fmt_g17(e.se) << "\n";
    result["k"][n.str()] = {{"value", e.value}, {"se", e.se}};
  }
  if (!density_at.empty()) {
    asgkit::SimplexPoint x(parse_doubles(density_at));
    double v = asgkit::estimate_density(ens, x, bandwidth);
    std::cout << "density = " << asgkit::fmt_g17(v) << "\n";
    result["density"] = v;
  }
  if (!out.empty()) {
    std::string path = resolve_out(out);
    if (format == "json") {
      result["params_hash"] = asgkit::hash_hex(hash);
      result["seed"] = cfg.seed;
      dump_json(result, path);
    } else {
      asgkit::write_ensemble_csv(ens, path);
    }
  }
  return 0;
}

int run_simulate_chain(const ModelOpts& model, const std::string& start_list, int reps,
                       std::uint64_t seed, long long max_steps, int table_size,
                       const std::string& out_dir) {
  asgkit::ModelParams params = model.params();
  std::uint64_t hash = asgkit::params_hash(params);
  asgkit::SampleConfig start(parse_ints(start_list));
  std::unique_ptr<asgkit::PiProvider> provider;
  asgkit::ProbTable table;
  if (auto pim = asgkit::PimParams::from_model(params)) {
    provider = std::make_unique<asgkit::PimPiProvider>(*pim);
  } else {
    int n = table_size > 0 ? table_size : start.size() + (params.neutral() ? 1 : 30);
    if (params.neutral()) {
      table = asgkit::solve_neutral(params, n);
    } else {
      table = asgkit::solve_selection_truncated(params, n).table;
    }
    provider = std::make_unique<asgkit::TablePiProvider>(table);
  }
  if (!out_dir.empty()) fs::create_directories(resolve_out(out_dir));
  long long total_steps = 0;
  int truncated = 0;
  for (int r = 0; r < reps; ++r) {
    asgkit::Rng rng(seed, static_cast<std::uint64_t>(r));
    asgkit::ChainTrajectory traj =
        asgkit::simulate_to_mrca(start, params, *provider, rng, max_steps);
    traj.seed = seed;
    total_steps += static_cast<long long>(traj.events.size());
    truncated += traj.truncated ? 1 : 0;
    if (!out_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "traj_%05d.csv", r);
      asgkit::write_trajectory_csv(traj, hash, (fs::path(resolve_out(out_dir)) / name).string());
    }
  }
  std::cout << "replicates = " << reps << "\n";
  std::cout << "mean_steps = " << asgkit::fmt_g17(static_cast<double>(total_steps) / reps) << "\n";
  std::cout << "truncated = " << truncated << "\n";
  return 0;
}

int run_dirichlet_limit(const std::string& alpha_list, const std::string& rule,
                        const std::string& grid, const std::string& out) {
  std::vector<double> alpha = parse_doubles(alpha_list);
  asgkit::AlphaSequence seq = rule == "linear"
                                  ? asgkit::AlphaSequence::linear(alpha)
                                  : asgkit::AlphaSequence::from_direction(asgkit::DirectionY(alpha));
  std::vector<int> ns = parse_grid(grid);
  std::uint64_t hash = asgkit::fnv1a64(alpha_list + "|" + rule);
  std::optional<asgkit::CsvWriter> w;
  if (!out.empty()) {
    w.emplace(resolve_out(out), hash, 0);
    w->header({"n", "sup_gap", "phi_n_sup", "ratio"});
  }
  for (int n : ns) {
    auto gap = asgkit::sup_norm_gap(n, seq);
    auto sup = asgkit::phi_n_sup(n, seq);
    std::cout << "n=" << n << " sup_gap=" << asgkit::fmt_g17(gap.gap)
              << " ratio=" << asgkit::fmt_g17(sup.ratio) << "\n";
    if (w) {
      w->line({std::to_string(n), asgkit::fmt_g17(gap.gap), asgkit::fmt_g17(sup.sup),
               asgkit::fmt_g17(sup.ratio)});
    }
  }
  return 0;
}

int run_asymptotics(const ModelOpts& model, const std::string& check, const std::string& y_list,
                    const std::string& grid, const std::string& source,
                    const std::string& ptilde, int idx_i, int idx_j, std::uint64_t seed,
                    long long samples, int mc_draws, double tol, const std::string& out,
                    const std::string& verdict_path) {
  asgkit::ModelParams params = model.params();
  std::uint64_t hash = asgkit::params_hash(params);
  asgkit::DirectionY dir(parse_doubles(y_list));
  std::vector<int> ns = parse_grid(grid);
  auto pim = asgkit::PimParams::from_model(params);

  int max_needed = 0;
  for (int n : ns) max_needed = std::max(max_needed, dir.scaled_config(n).size());

  // Assemble the requested p source.
  asgkit::ProbTable table;
  asgkit::StationaryEnsemble ens;
  std::optional<asgkit::LogPSource> p_src;
  std::unique_ptr<asgkit::PiProvider> provider;
  if (source == "pim") {
    if (!pim) throw asgkit::Error("asymptotics: --source pim needs parent-independent neutral parameters");
    p_src = asgkit::make_pim_source(*pim);
    provider = std::make_unique<asgkit::PimPiProvider>(*pim);
  } else if (source == "recursion") {
    if (!params.neutral()) {
      table = asgkit::solve_selection_truncated(params, max_needed + 2).table;
    } else {
      table = asgkit::solve_neutral(params, max_needed + 2);
    }
    p_src = asgkit::make_table_source(table);
    provider = std::make_unique<asgkit::TablePiProvider>(table);
  } else if (source == "mc") {
    asgkit::DiffusionConfig cfg;
    cfg.seed = seed;
    cfg.samples_per_replica = static_cast<int>((samples + cfg.replicas - 1) / cfg.replicas);
    ens = asgkit::stationary_sample(params, cfg, hash);
    p_src = asgkit::make_mc_source(ens);
    provider = std::make_unique<asgkit::McPiProvider>(ens);
  } else {
    throw CLI::ValidationError("--source must be pim, recursion, or mc");
  }

  // The stationary density: closed form when available, kernel estimate else.
  std::optional<asgkit::KdeDensity> kde;
  std::optional<asgkit::PtildeSource> pt_src;
  if (ptilde == "kde" || (!pim && ptilde == "auto")) {
    if (ens.size() == 0) {
      asgkit::DiffusionConfig cfg;
      cfg.seed = seed;
      cfg.samples_per_replica = static_cast<int>((samples + cfg.replicas - 1) / cfg.replicas);
      ens = asgkit::stationary_sample(params, cfg, hash);
    }
    kde.emplace(ens);
    pt_src = asgkit::make_kde_ptilde(*kde);
  } else if (pim) {
    pt_src = asgkit::make_dirichlet_ptilde(*pim);
  } else {
    throw asgkit::Error("asymptotics: --ptilde dirichlet needs parent-independent parameters");
  }

  json verdict;
  auto emit = [&](const asgkit::ConvergenceReport& rep, const std::string& suffix) {
    if (!out.empty()) {
      std::string path = resolve_out(out);
      if (!suffix.empty()) {
        fs::path p(path);
        path = (p.parent_path() / (p.stem().string() + "_" + suffix)).string() +
               p.extension().string();
      }
      write_report_csv(rep, hash, seed, path);
    }
    std::cout << rep.check << ": pass=" << (rep.pass() ? "true" : "false")
              << " final_rel_err=" << asgkit::fmt_g17(rep.final_rel_err()) << "\n";
  };

  if (check == "theorem-p") {
    auto rep = asgkit::check_theorem_p(dir, ns, *p_src, *pt_src, tol);
    emit(rep, "");
    verdict = verdict_json(rep, hash, seed);
  } else if (check == "k-over-b") {
    asgkit::Rng rng(seed, 0x6b6f6221ull);
    auto rep = asgkit::check_k_over_B(dir, ns, *p_src, *pt_src, rng, mc_draws, tol);
    emit(rep.direct, "");
    verdict = verdict_json(rep.direct, hash, seed);
    verdict["routes_agree"] = rep.routes_agree;
    verdict["mc_value"] = rep.mc_value;
    verdict["mc_se"] = rep.mc_se;
  } else if (check == "pi-limit") {
    auto rep = asgkit::check_pi_limit(idx_i - 1, dir, ns, *provider, tol);
    emit(rep, "");
    verdict = verdict_json(rep, hash, seed);
  } else if (check == "transition-limits") {
    auto reps = asgkit::check_transition_limits(dir, params, ns, *provider, idx_j - 1,
                                                idx_i - 1, tol);
    emit(reps.coalescence, "coalescence");
    emit(reps.mutation, "mutation");
    emit(reps.branching, "branching");
    verdict["check"] = "transition-limits";
    verdict["params_hash"] = asgkit::hash_hex(hash);
    verdict["coalescence"] = verdict_json(reps.coalescence, hash, seed);
    verdict["mutation"] = verdict_json(reps.mutation, hash, seed);
    verdict["branching"] = verdict_json(reps.branching, hash, seed);
    verdict["pass"] =
        reps.coalescence.pass() && reps.mutation.pass() && reps.branching.pass();
  } else if (check == "stirling") {
    if (!pim) throw asgkit::Error("asymptotics: stirling check needs parent-independent parameters");
    auto rows = asgkit::stirling_chain_report(ns, *pim, dir);
    if (!out.empty()) {
      asgkit::CsvWriter w(resolve_out(out), hash, seed);
      w.header({"n", "log_exact", "log_stage1", "log_stage2", "log_stage3", "ratio_s1_exact",
                "ratio_s2_s1", "ratio_s3_s2"});
      for (const auto& r : rows) {
        w.line({std::to_string(r.n), asgkit::fmt_g17(r.log_exact), asgkit::fmt_g17(r.log_stage1),
                asgkit::fmt_g17(r.log_stage2), asgkit::fmt_g17(r.log_stage3),
                asgkit::fmt_g17(std::exp(r.log_stage1 - r.log_exact)),
                asgkit::fmt_g17(std::exp(r.log_stage2 - r.log_stage1)),
                asgkit::fmt_g17(std::exp(r.log_stage3 - r.log_stage2))});
      }
    }
    const auto& last = rows.back();
    double final_ratio = std::exp(last.log_stage3 - last.log_exact);
    std::cout << "stirling: final stage3/exact = " << asgkit::fmt_g17(final_ratio) << "\n";
    verdict["check"] = "stirling";
    verdict["params_hash"] = asgkit::hash_hex(hash);
    verdict["final_ratio_s3_exact"] = final_ratio;
    verdict["pass"] = std::abs(final_ratio - 1.0) <= tol;
  } else {
    throw CLI::ValidationError(
        "--check must be theorem-p, k-over-b, pi-limit, transition-limits, or stirling");
  }
  if (!verdict_path.empty()) {
    dump_json(verdict, resolve_out(verdict_path));
  } else if (!out.empty()) {
    fs::path p(resolve_out(out));
    dump_json(verdict, (p.parent_path() / (p.stem().string() + ".verdict.json")).string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asgkit: sampling probabilities and asymptotics of the typed "
               "ancestral selection graph jump chain"};
  app.require_subcommand(1);

  // exact -------------------------------------------------------------------
  auto* exact = app.add_subcommand("exact", "parent-independent closed forms");
  ModelOpts exact_model;
  exact_model.attach(exact);
  std::string exact_n, exact_y, exact_out, exact_format = "csv";
  int exact_pi = 0, exact_nval = 1000;
  exact->add_option("--n", exact_n, "sample configuration, comma separated");
  exact->add_option("--pi", exact_pi, "also print pi[i|n] for this 1-based type");
  exact->add_option("--asymptotic-y", exact_y, "direction y for the decay law");
  exact->add_option("--nval", exact_nval, "n at which to evaluate the decay law");
  exact->add_option("--out", exact_out, "output file");
  exact->add_option("--format", exact_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  // solve -------------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "recursion tables for p(n)");
  ModelOpts solve_model;
  solve_model.attach(solve);
  int solve_max = 10, solve_nmax = 0;
  double solve_tol = std::numeric_limits<double>::infinity();
  std::string solve_policy = "drop", solve_out, solve_cache, solve_format = "csv";
  solve->add_option("--max-size", solve_max, "largest sample size in the table");
  solve->add_option("--nmax", solve_nmax, "truncation size under selection (default max+20)");
  solve->add_option("--policy", solve_policy, "closure above nmax: drop or pim-proxy")
      ->check(CLI::IsMember({"drop", "pim-proxy"}));
  solve->add_option("--trunc-tol", solve_tol, "max tolerated truncation shift in log p");
  solve->add_option("--out", solve_out, "table CSV path");
  solve->add_option("--cache", solve_cache, "binary cache path");
  solve->add_option("--format", solve_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  // diffusion ---------------------------------------------------------------
  auto* diff = app.add_subcommand("diffusion", "Wright-Fisher stationary sampling");
  ModelOpts diff_model;
  diff_model.attach(diff);
  asgkit::DiffusionConfig dcfg;
  long long diff_samples = 10000;
  std::vector<std::string> diff_estp, diff_estk;
  std::string diff_density, diff_out, diff_format = "csv";
  double diff_bw = 0.0;
  diff->add_option("--samples", diff_samples, "total stationary samples");
  diff->add_option("--dt", dcfg.dt, "Euler step");
  diff->add_option("--burnin", dcfg.burn_in, "burn-in time units");
  diff->add_option("--thin", dcfg.thin, "time units between samples");
  diff->add_option("--eps", dcfg.boundary_eps, "boundary clamp");
  diff->add_option("--replicas", dcfg.replicas, "independent replicas");
  diff->add_option("--threads", dcfg.threads, "worker threads");
  diff->add_option("--seed", dcfg.seed, "base seed");
  diff->add_option("--estimate-p", diff_estp, "estimate log p at this configuration")
      ->take_all();
  diff->add_option("--estimate-k", diff_estk, "estimate k at this configuration")->take_all();
  diff->add_option("--density", diff_density, "estimate the stationary density here");
  diff->add_option("--bandwidth", diff_bw, "kernel bandwidth (0 = Scott's rule)");
  diff->add_option("--out", diff_out, "ensemble CSV path");
  diff->add_option("--format", diff_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  // simulate-chain ----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate-chain", "jump-chain trajectories to the MRCA");
  ModelOpts sim_model;
  sim_model.attach(sim);
  std::string sim_start, sim_out;
  int sim_reps = 1, sim_table = 0;
  std::uint64_t sim_seed = 0;
  long long sim_max_steps = 1000000;
  sim->add_option("--start", sim_start, "starting configuration")->required();
  sim->add_option("--reps", sim_reps, "number of trajectories");
  sim->add_option("--seed", sim_seed, "base seed");
  sim->add_option("--max-steps", sim_max_steps, "truncation step budget");
  sim->add_option("--table-size", sim_table, "table size for the pi provider");
  sim->add_option("--out", sim_out, "directory for trajectory CSVs");

  // dirichlet-limit -----------------------------------------------------------
  auto* dl = app.add_subcommand("dirichlet-limit", "central/local limit measurements");
  std::string dl_alpha, dl_rule = "direction", dl_grid = "50:3200", dl_out;
  dl->add_option("--alpha", dl_alpha, "limit direction alpha")->required();
  dl->add_option("--rule", dl_rule, "sequence rule: direction (n y^(n) + 1) or linear (n alpha)")
      ->check(CLI::IsMember({"direction", "linear"}));
  dl->add_option("--grid", dl_grid, "n grid start:stop (doubling) or comma list");
  dl->add_option("--out", dl_out, "CSV path");

  // asymptotics ---------------------------------------------------------------
  auto* as = app.add_subcommand("asymptotics", "limit-theorem convergence reports");
  ModelOpts as_model;
  as_model.attach(as);
  std::string as_check, as_y, as_grid = "25:3200", as_source = "pim", as_ptilde = "auto";
  std::string as_out, as_verdict;
  int as_i = 1, as_j = 1, as_mc_draws = 20000;
  std::uint64_t as_seed = 0;
  long long as_samples = 100000;
  double as_tol = 1e-2;
  as->add_option("--check", as_check,
                 "theorem-p, k-over-b, pi-limit, transition-limits, or stirling")
      ->required();
  as->add_option("--y", as_y, "direction y")->required();
  as->add_option("--grid", as_grid, "n grid start:stop (doubling) or comma list");
  as->add_option("--source", as_source, "p source: pim, recursion, or mc")
      ->check(CLI::IsMember({"pim", "recursion", "mc"}));
  as->add_option("--ptilde", as_ptilde, "density source: auto, dirichlet, or kde")
      ->check(CLI::IsMember({"auto", "dirichlet", "kde"}));
  as->add_option("--i", as_i, "1-based type index i");
  as->add_option("--j", as_j, "1-based type index j");
  as->add_option("--seed", as_seed, "base seed for Monte Carlo routes");
  as->add_option("--samples", as_samples, "ensemble size for mc/kde sources");
  as->add_option("--mc-draws", as_mc_draws, "Dirichlet draws for the k-over-b cross-check");
  as->add_option("--tol", as_tol, "relative tolerance at the final grid point");
  as->add_option("--out", as_out, "report CSV path");
  as->add_option("--verdict", as_verdict, "verdict JSON path");

  try {
    app.parse(argc, argv);
    if (exact->parsed()) {
      return run_exact(exact_model, exact_n, exact_pi, exact_y, exact_nval, exact_out,
                       exact_format);
    }
    if (solve->parsed()) {
      return run_solve(solve_model, solve_max, solve_nmax, solve_policy, solve_tol, solve_out,
                       solve_cache, solve_format);
    }
    if (diff->parsed()) {
      return run_diffusion(diff_model, diff_samples, dcfg, diff_estp, diff_estk, diff_density,
                           diff_bw, diff_out, diff_format);
    }
    if (sim->parsed()) {
      return run_simulate_chain(sim_model, sim_start, sim_reps, sim_seed, sim_max_steps,
                                sim_table, sim_out);
    }
    if (dl->parsed()) return run_dirichlet_limit(dl_alpha, dl_rule, dl_grid, dl_out);
    if (as->parsed()) {
      return run_asymptotics(as_model, as_check, as_y, as_grid, as_source, as_ptilde, as_i,
                             as_j, as_seed, as_samples, as_mc_draws, as_tol, as_out,
                             as_verdict);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const asgkit::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const asgkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
