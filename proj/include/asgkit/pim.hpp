// Closed forms for the neutral parent-independent-mutation case: sampling
// probabilities, the one-step sampling distribution pi, the Dirichlet
// stationary density, and the polynomial-decay asymptotic constant.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "asgkit/core.hpp"

namespace asgkit {

class BoundaryPoint : public Error {
 public:
  using Error::Error;
};

// log of the multidimensional Beta function B(a) = prod Gamma(a_i) / Gamma(|a|).
inline double log_beta(const std::vector<double>& a) {
  double s = 0.0, tot = 0.0;
  for (double v : a) {
    s += std::lgamma(v);
    tot += v;
  }
  return s - std::lgamma(tot);
}

struct PimParams {
  double theta = 0.0;
  std::vector<double> q;  // strictly positive, sums to 1

  int d() const { return static_cast<int>(q.size()); }

  std::vector<double> alpha() const {  // theta * Q
    std::vector<double> a = q;
    for (double& v : a) v *= theta;
    return a;
  }

  static PimParams validate(double theta, std::vector<double> q) {
    if (!(theta > 0.0)) throw Error("PimParams: theta must be positive");
    if (q.size() < 2) throw Error("PimParams: need d >= 2");
    double s = 0.0;
    for (double v : q) {
      if (!(v > 0.0)) throw Error("PimParams: Q_i must be strictly positive");
      s += v;
    }
    if (std::abs(s - 1.0) > kSimplexTol) throw Error("PimParams: Q must sum to 1");
    return PimParams{theta, std::move(q)};
  }

  // Present when params are parent independent with no selection.
  static std::optional<PimParams> from_model(const ModelParams& mp) {
    if (!mp.is_pim() || !mp.neutral()) return std::nullopt;
    auto q = mp.pim_q();
    for (double v : q) {
      if (!(v > 0.0)) return std::nullopt;
    }
    return PimParams{mp.theta, std::move(q)};
  }

  ModelParams to_model() const {
    std::vector<double> P(static_cast<std::size_t>(d()) * d());
    for (int i = 0; i < d(); ++i) {
      for (int j = 0; j < d(); ++j) P[static_cast<std::size_t>(i) * d() + j] = q[j];
    }
    return ModelParams::validate(d(), theta, std::move(P), std::vector<double>(d(), 0.0));
  }
};

// log p(n) = log binom(|n|, n) + log B(n + theta Q) - log B(theta Q).
inline double pim_log_p(const SampleConfig& n, const PimParams& pp) {
  if (n.dim() != pp.d()) throw Error("pim_log_p: dimension mismatch");
  if (n.is_zero()) return 0.0;
  std::vector<double> a = pp.alpha();
  std::vector<double> shifted(a);
  for (int i = 0; i < n.dim(); ++i) shifted[i] += n[i];
  return log_multinomial(n) + log_beta(shifted) - log_beta(a);
}

// pi[i|n] = (n_i + theta Q_i) / (|n| + theta); the zero configuration gives Q_i.
inline double pim_pi(int i, const SampleConfig& n, const PimParams& pp) {
  if (n.dim() != pp.d()) throw Error("pim_pi: dimension mismatch");
  return (n[i] + pp.theta * pp.q[i]) / (n.size() + pp.theta);
}

// log Dirichlet(a) density of the first d-1 coordinates at x.
inline double dirichlet_log_density(const SimplexPoint& x, const std::vector<double>& a) {
  if (static_cast<std::size_t>(x.dim()) != a.size()) {
    throw Error("dirichlet_log_density: dimension mismatch");
  }
  double s = -log_beta(a);
  for (int i = 0; i < x.dim(); ++i) {
    if (!(a[i] > 0.0)) throw Error("dirichlet_log_density: parameters must be positive");
    if (a[i] == 1.0) continue;  // x^0 term, finite even on the boundary
    if (x[i] == 0.0) {
      if (a[i] < 1.0) throw BoundaryPoint("dirichlet_log_density: infinite at boundary");
      return -std::numeric_limits<double>::infinity();
    }
    s += (a[i] - 1.0) * std::log(x[i]);
  }
  return s;
}

// log of the decay law: (1-d) log n + (1-d) log|y| + log Dirichlet_{theta Q}(y/|y|).
inline double pim_asymptotic_log_p(int n, const DirectionY& dir, const PimParams& pp) {
  if (n < 1) throw Error("pim_asymptotic_log_p: n must be >= 1");
  if (dir.dim() != pp.d()) throw Error("pim_asymptotic_log_p: dimension mismatch");
  const double one_minus_d = 1.0 - pp.d();
  return one_minus_d * std::log(static_cast<double>(n)) +
         one_minus_d * std::log(dir.norm1()) +
         dirichlet_log_density(dir.direction(), pp.alpha());
}

}  // namespace asgkit
