// Numerical verification of the limit theorems: the polynomial decay of the
// sampling probabilities, the k/B limit and its Dirichlet-expectation
// representation, the limits of pi and of the scaled transition
// probabilities, and the chain of Stirling approximations for the
// parent-independent closed form.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "asgkit/chain.hpp"
#include "asgkit/core.hpp"
#include "asgkit/dirichlet.hpp"
#include "asgkit/pim.hpp"
#include "asgkit/recursion.hpp"
#include "asgkit/rng.hpp"

namespace asgkit {

class InfeasibleN : public Error {
 public:
  using Error::Error;
};

struct ReportRow {
  int n = 0;
  double observed = 0.0;
  double target = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
};

struct ConvergenceReport {
  std::string check;
  std::string provenance;
  double tolerance = 1e-2;
  std::vector<ReportRow> rows;

  static constexpr double kJitter = 1e-12;

  // Errors non-increasing over the last three grid points.
  bool monotone_tail() const {
    if (rows.size() < 3) return true;
    for (std::size_t k = rows.size() - 2; k < rows.size(); ++k) {
      if (rows[k].abs_err > rows[k - 1].abs_err + kJitter) return false;
    }
    return true;
  }

  double final_rel_err() const { return rows.empty() ? 0.0 : rows.back().rel_err; }

  bool pass() const { return !rows.empty() && final_rel_err() <= tolerance && monotone_tail(); }
};

namespace detail {
inline ReportRow make_row(int n, double observed, double target) {
  ReportRow r;
  r.n = n;
  r.observed = observed;
  r.target = target;
  r.abs_err = std::abs(observed - target);
  r.rel_err = target != 0.0 ? r.abs_err / std::abs(target) : r.abs_err;
  return r;
}
}  // namespace detail

// Where log p comes from: the closed form, a solved table, or Monte Carlo.
struct LogPSource {
  std::string name;
  int max_config_size = std::numeric_limits<int>::max();
  std::function<double(const SampleConfig&)> log_p;
  std::function<double(const SampleConfig&)> se_log;  // null for exact sources
};

inline LogPSource make_pim_source(const PimParams& pp) {
  return {"pim", std::numeric_limits<int>::max(),
          [pp](const SampleConfig& n) { return pim_log_p(n, pp); }, nullptr};
}

inline LogPSource make_table_source(const ProbTable& t) {
  return {"recursion", t.max_size(),
          [&t](const SampleConfig& n) { return t.log_p(n); }, nullptr};
}

inline LogPSource make_mc_source(const StationaryEnsemble& ens) {
  return {"mc", std::numeric_limits<int>::max(),
          [&ens](const SampleConfig& n) { return estimate_log_p(n, ens).log_p; },
          [&ens](const SampleConfig& n) { return estimate_log_p(n, ens).se_log; }};
}

// Where the stationary density comes from: the Dirichlet closed form in the
// parent-independent case, or a kernel estimate otherwise.
struct PtildeSource {
  std::string name;
  std::function<double(const SimplexPoint&)> density;
};

inline PtildeSource make_dirichlet_ptilde(const PimParams& pp) {
  return {"dirichlet", [pp](const SimplexPoint& x) {
            return std::exp(dirichlet_log_density(x, pp.alpha()));
          }};
}

inline PtildeSource make_kde_ptilde(const KdeDensity& kde) {
  return {"kde", [&kde](const SimplexPoint& x) { return kde(x); }};
}

namespace detail {
inline SampleConfig feasible_scaled(const DirectionY& dir, int n, const LogPSource& src) {
  SampleConfig cfg = dir.scaled_config(n);
  if (cfg.size() > src.max_config_size) {
    throw InfeasibleN("n = " + std::to_string(n) + " needs size " +
                      std::to_string(cfg.size()) + " beyond source '" + src.name + "'");
  }
  return cfg;
}
}  // namespace detail

// n^{d-1} p(n y^(n)) against |y|^{1-d} ptilde(y/|y|).
inline ConvergenceReport check_theorem_p(const DirectionY& dir, const std::vector<int>& n_grid,
                                         const LogPSource& p_src, const PtildeSource& pt_src,
                                         double tol = 1e-2) {
  const int d = dir.dim();
  ConvergenceReport rep;
  rep.check = "theorem-p";
  rep.provenance = "p=" + p_src.name + ",ptilde=" + pt_src.name;
  rep.tolerance = tol;
  const double target = std::pow(dir.norm1(), 1.0 - d) * pt_src.density(dir.direction());
  for (int n : n_grid) {
    SampleConfig cfg = detail::feasible_scaled(dir, n, p_src);
    double observed = std::exp((d - 1) * std::log(static_cast<double>(n)) + p_src.log_p(cfg));
    rep.rows.push_back(detail::make_row(n, observed, target));
  }
  return rep;
}

struct KOverBReport {
  ConvergenceReport direct;       // route (a): k/B from the p source
  std::vector<double> mc_value;   // route (b): E[ptilde(D^(n))] by sampling
  std::vector<double> mc_se;
  bool routes_agree = true;  // |a - b| within 3 combined standard errors
};

// k(n y^(n))/B(n y^(n)+1) -> ptilde(y/|y|), with the Dirichlet-expectation
// route estimated alongside as an internal cross-check.
inline KOverBReport check_k_over_B(const DirectionY& dir, const std::vector<int>& n_grid,
                                   const LogPSource& p_src, const PtildeSource& pt_src,
                                   Rng& rng, int mc_draws = 20000, double tol = 1e-2) {
  KOverBReport out;
  out.direct.check = "k-over-b";
  out.direct.provenance = "p=" + p_src.name + ",ptilde=" + pt_src.name;
  out.direct.tolerance = tol;
  const double target = pt_src.density(dir.direction());
  for (int n : n_grid) {
    SampleConfig cfg = detail::feasible_scaled(dir, n, p_src);
    std::vector<double> alpha(cfg.dim());
    for (int i = 0; i < cfg.dim(); ++i) alpha[i] = cfg[i] + 1.0;
    double direct =
        std::exp(p_src.log_p(cfg) - log_multinomial(cfg) - log_beta(alpha));
    out.direct.rows.push_back(detail::make_row(n, direct, target));

    double sum = 0.0, ssq = 0.0;
    for (int s = 0; s < mc_draws; ++s) {
      double v = pt_src.density(sample_dirichlet(alpha, rng));
      sum += v;
      ssq += v * v;
    }
    double mean = sum / mc_draws;
    double var = std::max(0.0, ssq / mc_draws - mean * mean);
    double se = std::sqrt(var / mc_draws);
    out.mc_value.push_back(mean);
    out.mc_se.push_back(se);
    double se_a = p_src.se_log ? std::abs(direct) * p_src.se_log(cfg) : 0.0;
    if (std::abs(direct - mean) > 3.0 * (se + se_a)) out.routes_agree = false;
  }
  return out;
}

// pi[i | n y^(n)] -> y_i/|y|.
inline ConvergenceReport check_pi_limit(int i, const DirectionY& dir,
                                        const std::vector<int>& n_grid,
                                        const PiProvider& provider, double tol = 1e-2) {
  ConvergenceReport rep;
  rep.check = "pi-limit";
  rep.provenance = "pi=" + provider.describe();
  rep.tolerance = tol;
  const double target = dir.y()[i] / dir.norm1();
  for (int n : n_grid) {
    SampleConfig cfg = dir.scaled_config(n);
    if (cfg.size() > provider.max_queryable_size()) {
      throw InfeasibleN("n = " + std::to_string(n) + " beyond pi provider");
    }
    rep.rows.push_back(detail::make_row(n, provider.pi(i, cfg), target));
  }
  return rep;
}

struct TransitionLimitReports {
  ConvergenceReport coalescence;  // rho(e_j)        -> y_j/|y|
  ConvergenceReport mutation;     // n rho(e_j-e_i)  -> theta P_ij y_i/|y|^2
  ConvergenceReport branching;    // n rho(-e_j)     -> |gamma_j| y_j/|y|^2
};

inline TransitionLimitReports check_transition_limits(const DirectionY& dir,
                                                      const ModelParams& params,
                                                      const std::vector<int>& n_grid,
                                                      const PiProvider& provider, int j, int i,
                                                      double tol = 1e-2) {
  TransitionLimitReports out;
  const double norm = dir.norm1();
  const double y_j = dir.y()[j];
  const double y_i = dir.y()[i];
  out.coalescence.check = "rho-coalescence";
  out.mutation.check = "rho-mutation";
  out.branching.check = "rho-branching";
  for (ConvergenceReport* r : {&out.coalescence, &out.mutation, &out.branching}) {
    r->provenance = "pi=" + provider.describe();
    r->tolerance = tol;
  }
  const double coal_target = y_j / norm;
  const double mut_target = params.theta * params.p(i, j) * y_i / (norm * norm);
  const double branch_target = std::abs(params.gamma[j]) * y_j / (norm * norm);
  for (int n : n_grid) {
    SampleConfig cfg = dir.scaled_config(n);
    TransitionDistribution dist = transition_distribution(cfg, params, provider);
    out.coalescence.rows.push_back(
        detail::make_row(n, dist.prob_of({Jump::Kind::Coalescence, j, 0}), coal_target));
    out.mutation.rows.push_back(
        detail::make_row(n, n * dist.prob_of({Jump::Kind::Mutation, j, i}), mut_target));
    out.branching.rows.push_back(
        detail::make_row(n, n * dist.prob_of({Jump::Kind::Branching, j, 0}), branch_target));
  }
  return out;
}

// The three displayed approximation stages of the parent-independent decay
// calculation, in log space: term-by-term Stirling, its algebraic
// rearrangement, and the polynomial-decay limit form.
struct StirlingRow {
  int n = 0;
  double log_exact = 0.0;
  double log_stage1 = 0.0;
  double log_stage2 = 0.0;
  double log_stage3 = 0.0;
};

inline std::vector<StirlingRow> stirling_chain_report(const std::vector<int>& n_grid,
                                                      const PimParams& pp,
                                                      const DirectionY& dir) {
  const int d = pp.d();
  if (dir.dim() != d) throw Error("stirling_chain_report: dimension mismatch");
  std::vector<StirlingRow> out;
  const double log_b = log_beta(pp.alpha());
  for (int n : n_grid) {
    SampleConfig cfg = dir.scaled_config(n);
    const double m = cfg.size();
    StirlingRow row;
    row.n = n;
    row.log_exact = pim_log_p(cfg, pp);

    auto stirling = [](double w) { return (w - 0.5) * std::log(w) - w; };
    double s1 = -log_b + stirling(m + 1.0) - stirling(m + pp.theta);
    for (int t = 0; t < d; ++t) {
      double a = cfg[t];
      s1 += stirling(a + pp.theta * pp.q[t]) - stirling(a + 1.0);
    }
    row.log_stage1 = s1;

    double s2 = -log_b + (m + 0.5) * std::log1p((1.0 - pp.theta) / (m + pp.theta)) +
                (1.0 - pp.theta) * std::log(m + pp.theta) + (pp.theta - 1.0);
    for (int t = 0; t < d; ++t) {
      double a = cfg[t];
      double aq = pp.theta * pp.q[t];
      s2 += (a + 0.5) * std::log1p((aq - 1.0) / (a + aq)) + (aq - 1.0) * std::log(a + aq) +
            (1.0 - aq);
    }
    row.log_stage2 = s2;

    row.log_stage3 = pim_asymptotic_log_p(n, dir, pp);
    out.push_back(row);
  }
  return out;
}

// Geometric grid {start, 2 start, 4 start, ...} capped at stop, always
// including stop itself.
inline std::vector<int> geometric_grid(int start, int stop) {
  if (start < 1 || stop < start) throw Error("geometric_grid: need 1 <= start <= stop");
  std::vector<int> g;
  for (long long v = start; v < stop; v *= 2) g.push_back(static_cast<int>(v));
  g.push_back(stop);
  return g;
}

}  // namespace asgkit
