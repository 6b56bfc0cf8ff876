// Shared domain types: sample configurations, model parameters, simplex
// points, directions for large-sample scaling, lattice enumeration in
// colexicographic order, and log-space numeric primitives.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace asgkit {

inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kPimTol = 1e-12;
inline constexpr double kSimplexTol = 1e-12;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// log-space primitives
// ---------------------------------------------------------------------------

inline double log_sum_exp(const std::vector<double>& logs) {
  if (logs.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : logs) s += std::exp(v - m);
  return m + std::log(s);
}

// C(a, b) as exact 64-bit arithmetic; callers keep a small enough that the
// intermediate products fit (lattice sizes are guarded upstream).
inline unsigned long long binomial(unsigned long long a, unsigned long long b) {
  if (b > a) return 0;
  b = std::min(b, a - b);
  unsigned long long r = 1;
  for (unsigned long long i = 1; i <= b; ++i) {
    r = r / i * (a - b + i) + r % i * (a - b + i) / i;
  }
  return r;
}

// Number of compositions of m into d non-negative parts.
inline unsigned long long composition_count(int d, int m) {
  return binomial(static_cast<unsigned long long>(m) + d - 1, d - 1);
}

// ---------------------------------------------------------------------------
// SampleConfig: a lattice point n, counts of lineages per allelic type.
// The all-zero configuration is not a chain state; it is admitted only as the
// boundary point of the sampling probability pi[.|0].
// ---------------------------------------------------------------------------

class SampleConfig {
 public:
  SampleConfig() = default;

  explicit SampleConfig(std::vector<int> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) throw Error("SampleConfig: empty count vector");
    for (int c : counts_) {
      if (c < 0) throw Error("SampleConfig: negative count");
    }
    size_ = std::accumulate(counts_.begin(), counts_.end(), 0);
  }

  static SampleConfig zero(int d) { return SampleConfig(std::vector<int>(d, 0)); }

  static SampleConfig unit(int d, int i) {
    std::vector<int> c(d, 0);
    c.at(i) = 1;
    return SampleConfig(std::move(c));
  }

  int dim() const { return static_cast<int>(counts_.size()); }
  int size() const { return size_; }  // 1-norm of n
  bool is_zero() const { return size_ == 0; }
  int operator[](int i) const { return counts_[i]; }
  const std::vector<int>& counts() const { return counts_; }

  SampleConfig plus(int i) const {
    std::vector<int> c = counts_;
    ++c.at(i);
    return SampleConfig(std::move(c));
  }

  SampleConfig minus(int j) const {
    std::vector<int> c = counts_;
    if (c.at(j) == 0) throw Error("SampleConfig: cannot remove from empty type");
    --c[j];
    return SampleConfig(std::move(c));
  }

  friend bool operator==(const SampleConfig& a, const SampleConfig& b) {
    return a.counts_ == b.counts_;
  }

  std::string str() const {
    std::string s = "(";
    for (int i = 0; i < dim(); ++i) {
      if (i) s += ",";
      s += std::to_string(counts_[i]);
    }
    return s + ")";
  }

 private:
  std::vector<int> counts_;
  int size_ = 0;
};

// log of the multinomial coefficient binom(|n|, n).
inline double log_multinomial(const SampleConfig& n) {
  double r = std::lgamma(static_cast<double>(n.size()) + 1.0);
  for (int i = 0; i < n.dim(); ++i) r -= std::lgamma(static_cast<double>(n[i]) + 1.0);
  return r;
}

// ---------------------------------------------------------------------------
// Lattice enumeration, colexicographic order.
// Order: configurations sorted by their last coordinate, ties broken by the
// colex order of the remaining prefix. This matches the rank function below
// and is frozen so that serialized tables are bit-stable across runs.
// ---------------------------------------------------------------------------

namespace detail {
inline void enumerate_rec(int d, int m, std::vector<int>& suffix,
                          std::vector<SampleConfig>& out) {
  if (d == 1) {
    std::vector<int> c;
    c.reserve(1 + suffix.size());
    c.push_back(m);
    c.insert(c.end(), suffix.rbegin(), suffix.rend());
    out.emplace_back(std::move(c));
    return;
  }
  for (int t = 0; t <= m; ++t) {
    suffix.push_back(t);
    enumerate_rec(d - 1, m - t, suffix, out);
    suffix.pop_back();
  }
}
}  // namespace detail

inline std::vector<SampleConfig> enumerate_configs(int d, int m) {
  if (d <= 0) throw Error("enumerate_configs: d must be positive");
  if (m <= 0) throw Error("enumerate_configs: m must be positive");
  std::vector<SampleConfig> out;
  out.reserve(composition_count(d, m));
  std::vector<int> suffix;
  detail::enumerate_rec(d, m, suffix, out);
  return out;
}

// Rank of a configuration within enumerate_configs(d, |n|).
inline std::size_t colex_rank(const SampleConfig& n) {
  std::size_t r = 0;
  int rem = n.size();
  for (int k = n.dim(); k >= 2; --k) {
    int t = n[k - 1];
    for (int s = 0; s < t; ++s) r += composition_count(k - 1, rem - s);
    rem -= t;
  }
  return r;
}

// ---------------------------------------------------------------------------
// ModelParams: mutation rate theta, mutation probability matrix P,
// selection parameters gamma (non-positive).
// ---------------------------------------------------------------------------

enum class Violation {
  NonStochasticRow,
  ReducibleMatrix,
  PositiveGamma,
  BadDimension,
  NonPositiveTheta,
};

inline const char* to_string(Violation v) {
  switch (v) {
    case Violation::NonStochasticRow: return "NonStochasticRow";
    case Violation::ReducibleMatrix: return "ReducibleMatrix";
    case Violation::PositiveGamma: return "PositiveGamma";
    case Violation::BadDimension: return "BadDimension";
    case Violation::NonPositiveTheta: return "NonPositiveTheta";
  }
  return "?";
}

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> v)
      : Error(join(v)), violations_(std::move(v)) {}
  const std::vector<Violation>& violations() const { return violations_; }
  bool has(Violation v) const {
    return std::find(violations_.begin(), violations_.end(), v) != violations_.end();
  }

 private:
  static std::string join(const std::vector<Violation>& v) {
    std::string s = "invalid model parameters:";
    for (Violation w : v) {
      s += " ";
      s += to_string(w);
    }
    return s;
  }
  std::vector<Violation> violations_;
};

struct ModelParams {
  int d = 0;
  double theta = 0.0;
  std::vector<double> P;      // row-major d x d
  std::vector<double> gamma;  // gamma_i <= 0

  double p(int i, int j) const { return P[static_cast<std::size_t>(i) * d + j]; }

  bool neutral() const {
    return std::all_of(gamma.begin(), gamma.end(), [](double g) { return g == 0.0; });
  }

  // max over (i, j) of gamma_i - gamma_j; the branching rate bound.
  double branching_bound() const {
    auto [lo, hi] = std::minmax_element(gamma.begin(), gamma.end());
    return *hi - *lo;
  }

  bool is_pim() const {
    for (int i = 1; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (std::abs(p(i, j) - p(0, j)) > kPimTol) return false;
      }
    }
    return true;
  }

  std::vector<double> pim_q() const {
    return std::vector<double>(P.begin(), P.begin() + d);
  }

  // Validates every constraint and reports all violations at once.
  static ModelParams validate(int d, double theta, std::vector<double> P,
                              std::vector<double> gamma) {
    std::vector<Violation> bad;
    if (d < 2 || P.size() != static_cast<std::size_t>(d) * d ||
        gamma.size() != static_cast<std::size_t>(d)) {
      bad.push_back(Violation::BadDimension);
      throw ValidationError(std::move(bad));
    }
    if (!(theta > 0.0)) bad.push_back(Violation::NonPositiveTheta);
    bool stochastic = true;
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) {
        double v = P[static_cast<std::size_t>(i) * d + j];
        if (v < 0.0 || !std::isfinite(v)) stochastic = false;
        s += v;
      }
      if (std::abs(s - 1.0) > kRowSumTol) stochastic = false;
    }
    if (!stochastic) bad.push_back(Violation::NonStochasticRow);
    for (double g : gamma) {
      if (g > 0.0 || !std::isfinite(g)) {
        bad.push_back(Violation::PositiveGamma);
        break;
      }
    }
    if (stochastic && !irreducible(d, P)) bad.push_back(Violation::ReducibleMatrix);
    if (!bad.empty()) throw ValidationError(std::move(bad));
    ModelParams m;
    m.d = d;
    m.theta = theta;
    m.P = std::move(P);
    m.gamma = std::move(gamma);
    return m;
  }

  // Strong connectivity of the support graph of P, by boolean closure.
  static bool irreducible(int d, const std::vector<double>& P) {
    std::vector<char> reach(static_cast<std::size_t>(d) * d, 0);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        reach[static_cast<std::size_t>(i) * d + j] =
            (i == j) || P[static_cast<std::size_t>(i) * d + j] > 0.0;
      }
    }
    for (int k = 0; k < d; ++k) {
      for (int i = 0; i < d; ++i) {
        if (!reach[static_cast<std::size_t>(i) * d + k]) continue;
        for (int j = 0; j < d; ++j) {
          if (reach[static_cast<std::size_t>(k) * d + j]) {
            reach[static_cast<std::size_t>(i) * d + j] = 1;
          }
        }
      }
    }
    return std::all_of(reach.begin(), reach.end(), [](char c) { return c != 0; });
  }
};

// ---------------------------------------------------------------------------
// SimplexPoint: allele frequencies x with sum 1.
// ---------------------------------------------------------------------------

class SimplexPoint {
 public:
  explicit SimplexPoint(std::vector<double> x) : x_(std::move(x)) {
    if (x_.size() < 2) throw Error("SimplexPoint: need dimension >= 2");
    double s = 0.0;
    for (double v : x_) {
      if (v < -kSimplexTol || v > 1.0 + kSimplexTol || !std::isfinite(v)) {
        throw Error("SimplexPoint: coordinate outside [0,1]");
      }
      s += v;
    }
    if (std::abs(s - 1.0) > kSimplexTol) throw Error("SimplexPoint: coordinates do not sum to 1");
  }

  // Builds the full point from the first d-1 chart coordinates.
  static SimplexPoint from_chart(const std::vector<double>& z) {
    std::vector<double> x = z;
    double s = std::accumulate(z.begin(), z.end(), 0.0);
    x.push_back(1.0 - s);
    return SimplexPoint(std::move(x));
  }

  int dim() const { return static_cast<int>(x_.size()); }
  double operator[](int i) const { return x_[i]; }
  const std::vector<double>& coords() const { return x_; }

  std::vector<double> chart() const {
    return std::vector<double>(x_.begin(), x_.end() - 1);
  }

  bool interior(double eps) const {
    if (!(eps > 0.0)) throw Error("SimplexPoint::interior: eps must be positive");
    return std::all_of(x_.begin(), x_.end(), [eps](double v) { return v >= eps; });
  }

 private:
  std::vector<double> x_;
};

// ---------------------------------------------------------------------------
// DirectionY: strictly positive direction y with a lattice sequence rule
// y^(n) in (1/n) N^d converging to y. Default rule: y^(n)_i = ceil(n y_i)/n,
// with products within 1e-9 of an integer snapped down to it.
// ---------------------------------------------------------------------------

class DirectionY {
 public:
  using Rule = std::function<std::vector<int>(int)>;

  explicit DirectionY(std::vector<double> y, Rule rule = nullptr)
      : y_(std::move(y)), rule_(std::move(rule)) {
    if (y_.empty()) throw Error("DirectionY: empty direction");
    for (double v : y_) {
      if (!(v > 0.0) || !std::isfinite(v)) throw Error("DirectionY: y_i must be positive");
    }
  }

  int dim() const { return static_cast<int>(y_.size()); }
  const std::vector<double>& y() const { return y_; }
  double norm1() const { return std::accumulate(y_.begin(), y_.end(), 0.0); }

  SimplexPoint direction() const {  // y / |y|
    std::vector<double> x = y_;
    double s = norm1();
    for (double& v : x) v /= s;
    return SimplexPoint(std::move(x));
  }

  // The lattice point n y^(n) (integer counts).
  std::vector<int> scaled_counts(int n) const {
    if (n < 1) throw Error("DirectionY: n must be >= 1");
    if (rule_) return rule_(n);
    std::vector<int> c(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i) {
      c[i] = static_cast<int>(std::ceil(n * y_[i] - 1e-9));
      if (c[i] < 1) c[i] = 1;  // y_i > 0 forces at least one lineage
    }
    return c;
  }

  SampleConfig scaled_config(int n) const { return SampleConfig(scaled_counts(n)); }

  std::vector<double> y_n(int n) const {
    std::vector<int> c = scaled_counts(n);
    std::vector<double> v(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) v[i] = static_cast<double>(c[i]) / n;
    return v;
  }

 private:
  std::vector<double> y_;
  Rule rule_;
};

// ---------------------------------------------------------------------------
// ProbTable: log sampling probabilities for all configurations of size <= N.
// Levels are stored in colex order; the zero configuration has log p = 0.
// ---------------------------------------------------------------------------

class ProbTable {
 public:
  ProbTable() = default;

  ProbTable(int d, int max_size) : d_(d), max_size_(max_size) {
    if (d < 1 || max_size < 1) throw Error("ProbTable: bad shape");
    levels_.resize(max_size);
    for (int m = 1; m <= max_size; ++m) {
      levels_[m - 1].assign(composition_count(d, m),
                            std::numeric_limits<double>::quiet_NaN());
    }
  }

  int d() const { return d_; }
  int max_size() const { return max_size_; }

  bool contains(const SampleConfig& n) const {
    if (n.dim() != d_) return false;
    if (n.is_zero()) return true;
    if (n.size() > max_size_) return false;
    return !std::isnan(levels_[n.size() - 1][colex_rank(n)]);
  }

  double log_p(const SampleConfig& n) const {
    if (n.dim() != d_) throw Error("ProbTable: dimension mismatch");
    if (n.is_zero()) return 0.0;
    if (n.size() > max_size_) throw Error("ProbTable: configuration beyond table size");
    return levels_[n.size() - 1][colex_rank(n)];
  }

  void set_log_p(const SampleConfig& n, double v) {
    if (n.dim() != d_ || n.is_zero() || n.size() > max_size_) {
      throw Error("ProbTable: configuration not indexable");
    }
    levels_[n.size() - 1][colex_rank(n)] = v;
  }

  const std::vector<double>& level(int m) const { return levels_.at(m - 1); }
  std::vector<double>& level(int m) { return levels_.at(m - 1); }

  // log of sum_{|n| = m} p(n); 0 when the level normalizes.
  double level_log_sum(int m) const { return log_sum_exp(levels_.at(m - 1)); }

  template <class F>
  void for_each(F&& f) const {  // size-major, colex within size
    for (int m = 1; m <= max_size_; ++m) {
      auto states = enumerate_configs(d_, m);
      for (std::size_t r = 0; r < states.size(); ++r) f(states[r], levels_[m - 1][r]);
    }
  }

 private:
  int d_ = 0;
  int max_size_ = 0;
  std::vector<std::vector<double>> levels_;
};

}  // namespace asgkit
