// File formats: the flat key = value model config, CSV emission with a
// provenance comment line, the probability-table CSV and binary cache, and
// the FNV hash used to key cached artifacts. Numbers are serialized with 17
// significant digits so doubles round-trip exactly.
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "asgkit/chain.hpp"
#include "asgkit/core.hpp"
#include "asgkit/diffusion.hpp"
#include "asgkit/recursion.hpp"

namespace asgkit {

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t params_hash(const ModelParams& p) {
  std::string s = "d=" + std::to_string(p.d) + ";theta=" + fmt_g17(p.theta) + ";P=";
  for (double v : p.P) s += fmt_g17(v) + ",";
  s += ";gamma=";
  for (double v : p.gamma) s += fmt_g17(v) + ",";
  return fnv1a64(s);
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Model config: flat "key = value" lines, '#' comments, keys d, theta,
// P (row-major), gamma. Values may be separated by spaces or commas.
// ---------------------------------------------------------------------------

inline std::vector<double> parse_number_list(const std::string& text) {
  std::string cleaned = text;
  for (char& c : cleaned) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

inline ModelParams parse_model_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      auto last = s.find_last_not_of(" \t\r");
      s.erase(last == std::string::npos ? 0 : last + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  for (const char* key : {"d", "theta", "P", "gamma"}) {
    if (!kv.count(key)) throw Error(std::string("config: missing key '") + key + "'");
  }
  int d = static_cast<int>(std::stol(kv["d"]));
  double theta = std::stod(kv["theta"]);
  return ModelParams::validate(d, theta, parse_number_list(kv["P"]),
                               parse_number_list(kv["gamma"]));
}

inline ModelParams load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path);
  return parse_model_config(in);
}

inline void save_model_config(const ModelParams& p, std::ostream& out) {
  out << "d = " << p.d << "\n";
  out << "theta = " << fmt_g17(p.theta) << "\n";
  out << "P =";
  for (double v : p.P) out << " " << fmt_g17(v);
  out << "\ngamma =";
  for (double v : p.gamma) out << " " << fmt_g17(v);
  out << "\n";
}

// ---------------------------------------------------------------------------
// CSV emission. Every file starts with a comment line carrying the params
// hash and the seed, then a header row.
// ---------------------------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::uint64_t hash, std::uint64_t seed)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open output file " + path);
    out_ << "# params_hash=" << hash_hex(hash) << " seed=" << seed << "\n";
  }

  void header(const std::vector<std::string>& cols) { line(cols); }

  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ",";
      out_ << cells[i];
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_prob_table_csv(const ProbTable& t, std::uint64_t hash,
                                 const std::string& path) {
  CsvWriter w(path, hash, 0);
  std::vector<std::string> cols;
  for (int i = 1; i <= t.d(); ++i) cols.push_back("n" + std::to_string(i));
  cols.push_back("log_p");
  w.header(cols);
  t.for_each([&](const SampleConfig& n, double lp) {
    std::vector<std::string> cells;
    for (int i = 0; i < n.dim(); ++i) cells.push_back(std::to_string(n[i]));
    cells.push_back(fmt_g17(lp));
    w.line(cells);
  });
}

inline void write_ensemble_csv(const StationaryEnsemble& ens, const std::string& path) {
  CsvWriter w(path, ens.params_hash, ens.config.seed);
  std::vector<std::string> cols = {"replica", "time"};
  for (int i = 1; i <= ens.d; ++i) cols.push_back("x" + std::to_string(i));
  w.header(cols);
  for (std::size_t r = 0; r < ens.replicas.size(); ++r) {
    double t = ens.config.burn_in;
    for (const auto& x : ens.replicas[r]) {
      std::vector<std::string> cells = {std::to_string(r), fmt_g17(t)};
      for (double v : x) cells.push_back(fmt_g17(v));
      w.line(cells);
      t += ens.config.thin;
    }
  }
}

inline void write_trajectory_csv(const ChainTrajectory& traj, std::uint64_t hash,
                                 const std::string& path) {
  CsvWriter w(path, hash, traj.seed);
  std::vector<std::string> cols = {"step"};
  for (int i = 1; i <= traj.states.front().dim(); ++i) cols.push_back("n" + std::to_string(i));
  cols.push_back("event");
  w.header(cols);
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    std::vector<std::string> cells = {std::to_string(s)};
    for (int i = 0; i < traj.states[s].dim(); ++i) {
      cells.push_back(std::to_string(traj.states[s][i]));
    }
    cells.push_back(s == 0 ? std::string("start") : traj.events[s - 1].label());
    w.line(cells);
  }
}

// ---------------------------------------------------------------------------
// Binary table cache, keyed by (params hash, N, truncation policy).
// ---------------------------------------------------------------------------

struct CacheKey {
  std::uint64_t params_hash = 0;
  std::int32_t max_size = 0;
  std::int32_t n_max = 0;  // 0 for the neutral solver
  std::int32_t closure = 0;
};

inline void write_table_cache(const ProbTable& t, const CacheKey& key,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open cache file " + path);
  const char magic[4] = {'A', 'S', 'G', 'T'};
  out.write(magic, 4);
  std::int32_t version = 1, d = t.d();
  auto put = [&out](const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  };
  put(&version, 4);
  put(&key.params_hash, 8);
  put(&key.max_size, 4);
  put(&key.n_max, 4);
  put(&key.closure, 4);
  put(&d, 4);
  for (int m = 1; m <= t.max_size(); ++m) {
    const auto& lvl = t.level(m);
    put(lvl.data(), lvl.size() * sizeof(double));
  }
}

inline std::optional<ProbTable> read_table_cache(const CacheKey& key,
                                                 const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "ASGT") return std::nullopt;
  auto get = [&in](void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  };
  std::int32_t version = 0, d = 0;
  CacheKey k;
  get(&version, 4);
  get(&k.params_hash, 8);
  get(&k.max_size, 4);
  get(&k.n_max, 4);
  get(&k.closure, 4);
  get(&d, 4);
  if (!in || version != 1 || k.params_hash != key.params_hash ||
      k.max_size != key.max_size || k.n_max != key.n_max || k.closure != key.closure) {
    return std::nullopt;
  }
  ProbTable t(d, k.max_size);
  for (int m = 1; m <= t.max_size(); ++m) {
    auto& lvl = t.level(m);
    get(lvl.data(), lvl.size() * sizeof(double));
  }
  if (!in) return std::nullopt;
  return t;
}

}  // namespace asgkit
