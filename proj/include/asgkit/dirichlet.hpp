// Dirichlet central and local limit machinery: Gamma-based sampling, the
// limiting Gaussian covariance Sigma(alpha), the rescaled densities phi_n and
// their Gaussian limit phi, sup-norm gap measurement on a grid, the
// closed-form sup of phi_n with its limit, and the diffusion-matrix
// determinant identity det(sigma_{d-1}(x)) = prod x_i.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "asgkit/core.hpp"
#include "asgkit/diffusion.hpp"
#include "asgkit/pim.hpp"
#include "asgkit/rng.hpp"

namespace asgkit {

class NonPositiveAlpha : public Error {
 public:
  using Error::Error;
};

class ModeOnBoundary : public Error {
 public:
  using Error::Error;
};

class SingularCovariance : public Error {
 public:
  using Error::Error;
};

// Normalized vector of independent Gamma draws; the rate beta cancels in the
// normalization, which the tests check statistically.
inline SimplexPoint dirichlet_from_gammas(const std::vector<double>& g) {
  double s = 0.0;
  for (double v : g) {
    if (!(v > 0.0)) throw Error("dirichlet_from_gammas: draws must be positive");
    s += v;
  }
  std::vector<double> x(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) x[i] = g[i] / s;
  return SimplexPoint(std::move(x));
}

inline SimplexPoint sample_dirichlet(const std::vector<double>& alpha, Rng& rng,
                                     double beta = 1.0) {
  if (alpha.size() < 2) throw NonPositiveAlpha("sample_dirichlet: need d >= 2");
  std::vector<double> g(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0)) throw NonPositiveAlpha("sample_dirichlet: alpha_i <= 0");
    g[i] = rng.gamma(alpha[i], beta);
  }
  return dirichlet_from_gammas(g);
}

// The sequence alpha^(n) with alpha^(n)/n -> alpha. The default rule used by
// the sampling-probability representation is alpha^(n) = n y^(n) + 1.
struct AlphaSequence {
  std::function<std::vector<double>(int)> alpha_n;
  std::vector<double> limit;

  static AlphaSequence from_direction(const DirectionY& dir) {
    AlphaSequence seq;
    seq.limit = dir.y();
    seq.alpha_n = [dir](int n) {
      std::vector<int> c = dir.scaled_counts(n);
      std::vector<double> a(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) a[i] = c[i] + 1.0;
      return a;
    };
    return seq;
  }

  static AlphaSequence linear(std::vector<double> alpha) {
    for (double v : alpha) {
      if (!(v > 0.0)) throw NonPositiveAlpha("AlphaSequence: alpha_i <= 0");
    }
    AlphaSequence seq;
    seq.limit = alpha;
    seq.alpha_n = [alpha](int n) {
      std::vector<double> a = alpha;
      for (double& v : a) v *= n;
      return a;
    };
    return seq;
  }

  int dim() const { return static_cast<int>(limit.size()); }
};

struct GaussianLimit {
  Eigen::MatrixXd sigma;          // d x d, rows sum to zero
  Eigen::MatrixXd sigma_reduced;  // leading (d-1) block, positive definite
};

// Sigma_ij(alpha) = (alpha_i/|alpha|^3)(delta_ij |alpha| - alpha_j).
inline GaussianLimit clt_covariance(const std::vector<double>& alpha) {
  const int d = static_cast<int>(alpha.size());
  double norm = 0.0;
  for (double v : alpha) {
    if (!(v > 0.0)) throw NonPositiveAlpha("clt_covariance: alpha_i <= 0");
    norm += v;
  }
  GaussianLimit g;
  g.sigma.resize(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      g.sigma(i, j) = alpha[i] / (norm * norm * norm) * ((i == j ? norm : 0.0) - alpha[j]);
    }
  }
  g.sigma_reduced = g.sigma.topLeftCorner(d - 1, d - 1);
  return g;
}

// Density of sqrt(n)(D^(n) - alpha^(n)/|alpha^(n)|) restricted to the first
// d-1 coordinates; zero outside the shifted and scaled simplex.
inline double phi_n_density(const std::vector<double>& u, int n, const AlphaSequence& seq) {
  const int d = seq.dim();
  if (static_cast<int>(u.size()) != d - 1) throw Error("phi_n_density: u must have d-1 entries");
  if (n < 1) throw Error("phi_n_density: n must be >= 1");
  std::vector<double> a = seq.alpha_n(n);
  double norm = 0.0;
  for (double v : a) {
    if (!(v > 0.0)) throw NonPositiveAlpha("phi_n_density: alpha^(n) <= 0");
    norm += v;
  }
  const double sqn = std::sqrt(static_cast<double>(n));
  std::vector<double> x(d);
  double sum = 0.0;
  for (int i = 0; i < d - 1; ++i) {
    x[i] = u[i] / sqn + a[i] / norm;
    sum += x[i];
  }
  x[d - 1] = 1.0 - sum;
  for (double v : x) {
    if (v <= 0.0) return 0.0;
  }
  double lg = -log_beta(a) - 0.5 * (d - 1) * std::log(static_cast<double>(n));
  for (int i = 0; i < d; ++i) lg += (a[i] - 1.0) * std::log(x[i]);
  return std::exp(lg);
}

// Centred (d-1)-dimensional Gaussian density with covariance Sigma_{d-1}.
inline double gaussian_density(const std::vector<double>& u, const GaussianLimit& lim) {
  const int k = static_cast<int>(lim.sigma_reduced.rows());
  if (static_cast<int>(u.size()) != k) throw Error("gaussian_density: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(lim.sigma_reduced);
  if (llt.info() != Eigen::Success) {
    throw SingularCovariance("gaussian_density: covariance not positive definite");
  }
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(u.data(), k);
  double quad = v.dot(llt.solve(v));
  double logdet = 0.0;
  for (int i = 0; i < k; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return std::exp(-0.5 * (quad + logdet + k * std::log(2.0 * M_PI)));
}

struct SupGapResult {
  double gap = 0.0;
  std::vector<double> argmax;
  std::size_t grid_points = 0;
};

// Max of |phi_n - phi| over a tensor grid extending extent_sd standard
// deviations per axis with spacing spacing_factor times the smallest one.
inline SupGapResult sup_norm_gap(int n, const AlphaSequence& seq, double extent_sd = 6.0,
                                 double spacing_factor = 0.05) {
  const int k = seq.dim() - 1;
  GaussianLimit lim = clt_covariance(seq.limit);
  std::vector<double> sd(k);
  double sd_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    sd[i] = std::sqrt(lim.sigma_reduced(i, i));
    sd_min = std::min(sd_min, sd[i]);
  }
  const double h = spacing_factor * sd_min;
  std::vector<long long> steps(k);
  long long total = 1;
  for (int i = 0; i < k; ++i) {
    steps[i] = 2 * std::llround(extent_sd * sd[i] / h) + 1;
    total *= steps[i];
    if (total > 20000000) throw Error("sup_norm_gap: grid too large; coarsen the spacing");
  }
  SupGapResult res;
  res.argmax.assign(k, 0.0);
  res.grid_points = static_cast<std::size_t>(total);
  std::vector<double> u(k);
  for (long long idx = 0; idx < total; ++idx) {
    long long rest = idx;
    for (int i = 0; i < k; ++i) {
      long long pos = rest % steps[i];
      rest /= steps[i];
      u[i] = (pos - (steps[i] - 1) / 2) * h;
    }
    double gap = std::abs(phi_n_density(u, n, seq) - gaussian_density(u, lim));
    if (gap > res.gap) {
      res.gap = gap;
      res.argmax = u;
    }
  }
  return res;
}

struct PhiSupResult {
  double sup = 0.0;    // closed-form ||phi_n||_inf via the interior mode
  double limit = 0.0;  // ((2 pi)^{d-1} prod(alpha_i/|alpha|) |alpha|^{1-d})^{-1/2}
  double ratio = 0.0;
};

inline PhiSupResult phi_n_sup(int n, const AlphaSequence& seq) {
  const int d = seq.dim();
  std::vector<double> a = seq.alpha_n(n);
  double norm = 0.0;
  for (double v : a) {
    if (v <= 1.0) throw ModeOnBoundary("phi_n_sup: alpha^(n)_i <= 1, mode not interior");
    norm += v;
  }
  double lg = -0.5 * (d - 1) * std::log(static_cast<double>(n)) - log_beta(a);
  for (double v : a) lg += (v - 1.0) * std::log((v - 1.0) / (norm - d));
  double lnorm = 0.0;
  double alpha_norm = 0.0;
  for (double v : seq.limit) alpha_norm += v;
  for (double v : seq.limit) lnorm += std::log(v / alpha_norm);
  lnorm += (d - 1) * std::log(2.0 * M_PI) - (d - 1) * std::log(alpha_norm);
  PhiSupResult res;
  res.sup = std::exp(lg);
  res.limit = std::exp(-0.5 * lnorm);
  res.ratio = res.sup / res.limit;
  return res;
}

// Determinant identity for the diffusion matrix: the leading (d-1) block of
// sigma(x) has determinant prod_{i=1..d} x_i.
inline std::pair<double, double> check_determinant_identity(const SimplexPoint& x) {
  const int d = x.dim();
  Eigen::MatrixXd block = diffusion_matrix(x).topLeftCorner(d - 1, d - 1);
  double lhs = Eigen::FullPivLU<Eigen::MatrixXd>(block).determinant();
  double rhs = 1.0;
  for (int i = 0; i < d; ++i) rhs *= x[i];
  return {lhs, rhs};
}

}  // namespace asgkit
