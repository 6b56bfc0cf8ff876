// Wright-Fisher diffusion on the simplex: drift and diffusion matrix,
// Euler-Maruyama sampling of the stationary law, Monte Carlo estimators for
// the moments k(n) and sampling probabilities p(n), and a boundary-corrected
// kernel density estimate of the stationary density.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "asgkit/core.hpp"
#include "asgkit/rng.hpp"

namespace asgkit {

class EmptyEnsemble : public Error {
 public:
  using Error::Error;
};

class TooCloseToBoundary : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

// mu_i(x) = theta (sum_j x_j P_ji - x_i) + x_i (gamma_i - sum_j gamma_j x_j).
inline std::vector<double> drift(const SimplexPoint& x, const ModelParams& params) {
  if (x.dim() != params.d) throw Error("drift: dimension mismatch");
  const int d = params.d;
  double gdot = 0.0;
  for (int j = 0; j < d; ++j) gdot += params.gamma[j] * x[j];
  std::vector<double> mu(d);
  for (int i = 0; i < d; ++i) {
    double in = 0.0;
    for (int j = 0; j < d; ++j) in += x[j] * params.p(j, i);
    mu[i] = params.theta * (in - x[i]) + x[i] * (params.gamma[i] - gdot);
  }
  return mu;
}

// sigma_ij(x) = x_i (delta_ij - x_j).
inline Eigen::MatrixXd diffusion_matrix(const SimplexPoint& x) {
  const int d = x.dim();
  Eigen::MatrixXd s(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) s(i, j) = x[i] * ((i == j ? 1.0 : 0.0) - x[j]);
  }
  return s;
}

struct DiffusionConfig {
  double dt = 1e-3;
  double burn_in = 50.0;        // time units discarded per replica
  double thin = 1.0;            // time units between retained samples
  double boundary_eps = 1e-9;   // clamp distance from the faces
  int replicas = 8;
  int samples_per_replica = 2000;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct StationaryEnsemble {
  int d = 0;
  DiffusionConfig config;
  std::uint64_t params_hash = 0;
  std::vector<std::vector<std::vector<double>>> replicas;  // [replica][sample] -> x
  std::vector<int> aborted;  // replica indices that hit a non-finite state

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& r : replicas) n += r.size();
    return n;
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& r : replicas) {
      for (const auto& x : r) f(x);
    }
  }
};

namespace detail {

// Symmetric PSD square root of the leading (d-1) block of sigma(x), with
// eigenvalues floored at zero.
inline Eigen::MatrixXd chart_noise_root(const std::vector<double>& x) {
  const int k = static_cast<int>(x.size()) - 1;
  if (k == 1) {
    Eigen::MatrixXd a(1, 1);
    a(0, 0) = std::sqrt(std::max(0.0, x[0] * (1.0 - x[0])));
    return a;
  }
  Eigen::MatrixXd s(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) s(i, j) = x[i] * ((i == j ? 1.0 : 0.0) - x[j]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  if (k <= 3) {
    es.computeDirect(s);
  } else {
    es.compute(s);
  }
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline void drift_raw(const std::vector<double>& x, const ModelParams& params,
                      std::vector<double>& mu) {
  const int d = params.d;
  double gdot = 0.0;
  for (int j = 0; j < d; ++j) gdot += params.gamma[j] * x[j];
  for (int i = 0; i < d; ++i) {
    double in = 0.0;
    for (int j = 0; j < d; ++j) in += x[j] * params.p(j, i);
    mu[i] = params.theta * (in - x[i]) + x[i] * (params.gamma[i] - gdot);
  }
}

inline void run_replica(const ModelParams& params, const DiffusionConfig& cfg,
                        std::uint64_t replica, std::vector<std::vector<double>>& out,
                        bool& ok) {
  const int d = params.d;
  const int k = d - 1;
  Rng rng(cfg.seed, replica);
  std::vector<double> x(d, 1.0 / d);  // chart state lives in x[0..k-1]
  std::vector<double> mu(d);
  const long long burn_steps = std::llround(cfg.burn_in / cfg.dt);
  const long long thin_steps = std::max<long long>(1, std::llround(cfg.thin / cfg.dt));
  const double sdt = std::sqrt(cfg.dt);
  const double eps = cfg.boundary_eps;
  Eigen::VectorXd noise(k), dz(k);
  out.clear();
  out.reserve(cfg.samples_per_replica);
  long long steps_left = std::max<long long>(1, burn_steps);
  int taken = 0;
  while (taken < cfg.samples_per_replica) {
    drift_raw(x, params, mu);
    if (k == 1) {
      dz(0) = std::sqrt(std::max(0.0, x[0] * (1.0 - x[0]))) * rng.normal();
    } else {
      Eigen::MatrixXd root = chart_noise_root(x);
      for (int i = 0; i < k; ++i) noise(i) = rng.normal();
      dz.noalias() = root * noise;
    }
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      x[i] += mu[i] * cfg.dt + sdt * dz(i);
      x[i] = std::clamp(x[i], eps, 1.0 - eps);
      sum += x[i];
    }
    if (sum > 1.0 - eps) {  // keep the implicit last coordinate off the face
      for (int i = 0; i < k; ++i) x[i] *= (1.0 - eps) / sum;
      sum = 1.0 - eps;
    }
    x[d - 1] = 1.0 - sum;
    bool finite = true;
    for (double v : x) finite = finite && std::isfinite(v);
    if (!finite) {
      ok = false;
      out.clear();
      return;
    }
    if (--steps_left <= 0) {
      out.push_back(x);
      ++taken;
      steps_left = thin_steps;
    }
  }
  ok = true;
}

}  // namespace detail

// Samples the stationary distribution with R independent replicas. The merge
// is ordered by replica index, so results do not depend on the thread count.
inline StationaryEnsemble stationary_sample(const ModelParams& params,
                                            const DiffusionConfig& cfg,
                                            std::uint64_t params_hash = 0) {
  if (!(cfg.dt > 0.0) || cfg.dt > cfg.thin) throw Error("diffusion: need 0 < dt <= thin");
  if (!(cfg.boundary_eps > 0.0) || cfg.boundary_eps >= 1.0 / params.d) {
    throw Error("diffusion: boundary clamp must lie in (0, 1/d)");
  }
  if (cfg.replicas < 1 || cfg.samples_per_replica < 1) {
    throw Error("diffusion: need at least one replica and one sample");
  }
  StationaryEnsemble ens;
  ens.d = params.d;
  ens.config = cfg;
  ens.params_hash = params_hash;
  ens.replicas.resize(cfg.replicas);
  std::vector<char> ok(cfg.replicas, 0);

  const int workers = std::max(1, std::min(cfg.threads, cfg.replicas));
  auto work = [&](int w) {
    for (int r = w; r < cfg.replicas; r += workers) {
      bool good = false;
      detail::run_replica(params, cfg, static_cast<std::uint64_t>(r), ens.replicas[r], good);
      ok[r] = good ? 1 : 0;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (int r = 0; r < cfg.replicas; ++r) {
    if (!ok[r]) ens.aborted.push_back(r);
  }
  if (ens.aborted.size() == ens.replicas.size()) {
    throw NonFiniteState("diffusion: every replica diverged");
  }
  return ens;
}

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

// k(n) = E[prod X_i^{n_i}] with a jackknife-over-replicas standard error.
inline McEstimate estimate_k(const SampleConfig& n, const StationaryEnsemble& ens) {
  if (ens.size() == 0) throw EmptyEnsemble("estimate_k: no samples");
  if (n.dim() != ens.d) throw Error("estimate_k: dimension mismatch");
  if (n.is_zero()) return {1.0, 0.0};
  std::vector<double> rep_mean;
  std::vector<std::size_t> rep_count;
  for (const auto& rep : ens.replicas) {
    if (rep.empty()) continue;
    double s = 0.0;
    for (const auto& x : rep) {
      double prod = 1.0;
      for (int i = 0; i < n.dim(); ++i) {
        if (n[i] > 0) prod *= std::pow(x[i], n[i]);
      }
      s += prod;
    }
    rep_mean.push_back(s / rep.size());
    rep_count.push_back(rep.size());
  }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < rep_mean.size(); ++r) {
    total += rep_mean[r] * rep_count[r];
    count += rep_count[r];
  }
  McEstimate e;
  e.value = total / count;
  const std::size_t nrep = rep_mean.size();
  if (nrep < 2) {
    e.se = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  double ssq = 0.0;
  std::vector<double> loo(nrep);
  for (std::size_t r = 0; r < nrep; ++r) {
    loo[r] = (total - rep_mean[r] * rep_count[r]) / (count - rep_count[r]);
  }
  double loo_bar = std::accumulate(loo.begin(), loo.end(), 0.0) / nrep;
  for (double v : loo) ssq += (v - loo_bar) * (v - loo_bar);
  e.se = std::sqrt((nrep - 1.0) / nrep * ssq);
  return e;
}

struct LogPEstimate {
  double log_p = 0.0;
  double se_log = 0.0;
  bool high_variance = false;  // relative standard error of k above 50%
};

// log p(n) = log binom(|n|, n) + log k(n), error propagated in log space.
inline LogPEstimate estimate_log_p(const SampleConfig& n, const StationaryEnsemble& ens) {
  McEstimate k = estimate_k(n, ens);
  LogPEstimate e;
  e.log_p = log_multinomial(n) + std::log(k.value);
  e.se_log = k.se / k.value;
  e.high_variance = k.se > 0.5 * k.value;
  return e;
}

// Gaussian product-kernel density on the (d-1)-coordinate chart, reflected
// across each simplex face; evaluation is restricted to interior points.
class KdeDensity {
 public:
  explicit KdeDensity(const StationaryEnsemble& ens, double bandwidth = 0.0) {
    if (ens.size() == 0) throw EmptyEnsemble("KdeDensity: no samples");
    d_ = ens.d;
    const int k = d_ - 1;
    pts_.reserve(ens.size());
    ens.for_each([&](const std::vector<double>& x) {
      pts_.emplace_back(x.begin(), x.end() - 1);
    });
    h_.assign(k, bandwidth);
    if (bandwidth <= 0.0) {  // Scott's rule per chart axis
      const double m = static_cast<double>(pts_.size());
      const double rate = std::pow(m, -1.0 / (k + 4.0));
      for (int j = 0; j < k; ++j) {
        double mean = 0.0, ssq = 0.0;
        for (const auto& z : pts_) mean += z[j];
        mean /= m;
        for (const auto& z : pts_) ssq += (z[j] - mean) * (z[j] - mean);
        h_[j] = std::max(std::sqrt(ssq / (m - 1.0)) * rate, 1e-6);
      }
    }
  }

  const std::vector<double>& bandwidths() const { return h_; }
  double margin() const { return *std::max_element(h_.begin(), h_.end()); }

  double operator()(const SimplexPoint& at) const {
    if (at.dim() != d_) throw Error("KdeDensity: dimension mismatch");
    if (!at.interior(margin())) {
      throw TooCloseToBoundary("KdeDensity: point within one bandwidth of a face");
    }
    return value_unchecked(at.chart());
  }

  // Raw chart-coordinate evaluation without the interior-margin guard; the
  // reflected estimate stays well defined up to the faces, which the
  // normalization quadrature needs.
  double value_unchecked(const std::vector<double>& z) const {
    const int k = d_ - 1;
    double sum = 0.0;
    std::vector<double> refl(k);
    for (const auto& s : pts_) {
      sum += kernel(z, s);
      for (int f = 0; f < k; ++f) {  // reflect across z_f = 0
        refl = s;
        refl[f] = -refl[f];
        sum += kernel(z, refl);
      }
      {  // reflect across sum z = 1
        double ssum = std::accumulate(s.begin(), s.end(), 0.0);
        refl = s;
        const double shift = 2.0 * (1.0 - ssum) / k;
        for (double& v : refl) v += shift;
        sum += kernel(z, refl);
      }
    }
    return sum / static_cast<double>(pts_.size());
  }

 private:
  double kernel(const std::vector<double>& z, const std::vector<double>& s) const {
    static const double inv_sqrt_2pi = 0.39894228040143268;
    double v = 1.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      double u = (z[j] - s[j]) / h_[j];
      if (std::abs(u) > 8.0) return 0.0;
      v *= inv_sqrt_2pi / h_[j] * std::exp(-0.5 * u * u);
    }
    return v;
  }

  int d_ = 0;
  std::vector<std::vector<double>> pts_;  // chart coordinates
  std::vector<double> h_;
};

inline double estimate_density(const StationaryEnsemble& ens, const SimplexPoint& at,
                               double bandwidth = 0.0) {
  return KdeDensity(ens, bandwidth)(at);
}

}  // namespace asgkit
