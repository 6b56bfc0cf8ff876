// Exact sampling probabilities for parent-dependent mutation, obtained by
// solving the linear system that normalization of the jump-chain transition
// distribution imposes on p. Writing m = |n| and D = sum_r n_r|gamma_r| +
// m(m-1+theta), summing the transition probabilities out of n to one and
// eliminating pi through pi[i|n] = ((n_i+1)/(m+1)) p(n+e_i)/p(n) gives
//
//   D p(n) = m sum_j (n_j-1) p(n-e_j)
//          + theta sum_{i,j} P_ij (n_i+1-delta_ij) p(n-e_j+e_i) [n_j >= 1]
//          + (m/(m+1)) sum_j |gamma_j| (n_j+1) p(n+e_j).
//
// Without selection the system is block-triangular in m and the size-1
// block reduces to the invariant measure of P; with selection the upward
// coupling is closed off above a truncation size and the whole system is
// solved at once, normalized by sum_i p(e_i) = 1.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <vector>

#include "asgkit/core.hpp"

namespace asgkit {

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

class NonConvergedTruncation : public Error {
 public:
  using Error::Error;
};

class OutOfTable : public Error {
 public:
  using Error::Error;
};

struct TruncationPolicy {
  enum class Closure { DropBranching, PimProxy };
  int n_max = 0;  // 0 picks N + 20
  Closure closure = Closure::DropBranching;
};

namespace detail {

inline constexpr std::size_t kMaxLevelStates = 100000;

inline void check_level_sizes(int d, int n) {
  for (int m = 1; m <= n; ++m) {
    if (composition_count(d, m) > kMaxLevelStates) {
      throw DimensionTooLarge("recursion: level " + std::to_string(m) +
                              " exceeds the state budget");
    }
  }
}

inline Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& a,
                                    const Eigen::VectorXd& b) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw SingularSystem("sparse factorization failed (matrix numerically singular)");
  }
  Eigen::VectorXd x = lu.solve(b);
  double scale = std::max(b.cwiseAbs().maxCoeff(), x.cwiseAbs().maxCoeff());
  double resid = (a * x - b).cwiseAbs().maxCoeff();
  if (!(resid <= 1e-9 * std::max(scale, 1.0))) {
    throw SingularSystem("sparse solve residual " + std::to_string(resid) +
                         " indicates an ill-conditioned system");
  }
  return x;
}

}  // namespace detail

// Invariant measure of P (the size-1 boundary of the neutral system):
// p(e_a) = sum_i P_ia p(e_i), normalized to sum 1.
inline std::vector<double> invariant_measure(const ModelParams& params) {
  const int d = params.d;
  Eigen::MatrixXd m(d, d);
  for (int a = 0; a < d; ++a) {
    for (int i = 0; i < d; ++i) m(a, i) = params.p(i, a) - (i == a ? 1.0 : 0.0);
  }
  for (int i = 0; i < d; ++i) m(d - 1, i) = 1.0;  // replaces one redundant row
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  b(d - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) {
    throw SingularSystem("invariant measure: boundary system singular");
  }
  Eigen::VectorXd x = lu.solve(b);
  std::vector<double> out(d);
  for (int i = 0; i < d; ++i) {
    if (!(x(i) > 0.0)) throw SingularSystem("invariant measure: non-positive entry");
    out[i] = x(i);
  }
  return out;
}

namespace detail {

// One within-size block of the identity: coefficients of p at size m on the
// left, the size m-1 coalescence contribution as right-hand side.
inline std::vector<double> solve_level(const ModelParams& params, int m,
                                       const std::vector<SampleConfig>& states,
                                       const std::vector<double>& below) {
  const int d = params.d;
  const int count = static_cast<int>(states.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(count) * (1 + d * (d - 1)));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(count);
  for (int r = 0; r < count; ++r) {
    const SampleConfig& n = states[r];
    double diag = m * (m - 1.0 + params.theta);
    for (int j = 0; j < d; ++j) {
      if (n[j] == 0) continue;
      diag -= params.theta * params.p(j, j) * n[j];
      for (int i = 0; i < d; ++i) {
        if (i == j || params.p(i, j) == 0.0) continue;
        SampleConfig to = n.minus(j).plus(i);
        trip.emplace_back(r, static_cast<int>(colex_rank(to)),
                          -params.theta * params.p(i, j) * (n[i] + 1.0));
      }
      if (n[j] >= 2) rhs(r) += m * (n[j] - 1.0) * below[colex_rank(n.minus(j))];
    }
    trip.emplace_back(r, r, diag);
  }
  Eigen::SparseMatrix<double> a(count, count);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd x = sparse_solve(a, rhs);
  return std::vector<double>(x.data(), x.data() + count);
}

}  // namespace detail

// Neutral solver: size levels solved sequentially (the system is
// block-triangular in |n| when gamma = 0).
inline ProbTable solve_neutral(const ModelParams& params, int max_size) {
  if (!params.neutral()) throw Error("solve_neutral: selection parameters must be zero");
  if (max_size < 1) throw Error("solve_neutral: max_size must be >= 1");
  detail::check_level_sizes(params.d, max_size);
  ProbTable table(params.d, max_size);
  std::vector<double> level = invariant_measure(params);
  for (std::size_t r = 0; r < level.size(); ++r) table.level(1)[r] = std::log(level[r]);
  for (int m = 2; m <= max_size; ++m) {
    auto states = enumerate_configs(params.d, m);
    level = detail::solve_level(params, m, states, level);
    for (std::size_t r = 0; r < level.size(); ++r) {
      if (!(level[r] > 0.0)) throw SingularSystem("solve_neutral: non-positive probability");
      table.level(m)[r] = std::log(level[r]);
    }
  }
  return table;
}

namespace detail {

// Joint solve over sizes 1..limit with upward coupling, closed at the top
// level by the chosen rule. Scale is pinned by sum_i p(e_i) = 1 in place of
// the first size-1 identity.
inline std::vector<std::vector<double>> solve_joint(const ModelParams& params, int limit,
                                                    TruncationPolicy::Closure closure) {
  const int d = params.d;
  check_level_sizes(d, limit);
  std::vector<std::vector<SampleConfig>> states(limit);
  std::vector<int> offset(limit + 1, 0);
  for (int m = 1; m <= limit; ++m) {
    states[m - 1] = enumerate_configs(d, m);
    offset[m] = offset[m - 1] + static_cast<int>(states[m - 1].size());
  }
  const int total = offset[limit];
  std::vector<double> qstar;
  if (closure == TruncationPolicy::Closure::PimProxy) qstar = invariant_measure(params);

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);
  for (int m = 1; m <= limit; ++m) {
    for (std::size_t r = 0; r < states[m - 1].size(); ++r) {
      const SampleConfig& n = states[m - 1][r];
      const int row = offset[m - 1] + static_cast<int>(r);
      if (m == 1 && r == 0) {  // normalization row
        for (int i = 0; i < d; ++i) trip.emplace_back(row, i, 1.0);
        rhs(row) = 1.0;
        continue;
      }
      double diag = m * (m - 1.0 + params.theta);
      for (int j = 0; j < d; ++j) diag += n[j] * std::abs(params.gamma[j]);
      for (int j = 0; j < d; ++j) {
        if (n[j] >= 1) {
          diag -= params.theta * params.p(j, j) * n[j];
          for (int i = 0; i < d; ++i) {
            if (i == j || params.p(i, j) == 0.0) continue;
            SampleConfig to = n.minus(j).plus(i);
            trip.emplace_back(row, offset[m - 1] + static_cast<int>(colex_rank(to)),
                              -params.theta * params.p(i, j) * (n[i] + 1.0));
          }
          if (n[j] >= 2) {
            trip.emplace_back(row, offset[m - 2] + static_cast<int>(colex_rank(n.minus(j))),
                              -static_cast<double>(m) * (n[j] - 1.0));
          }
        }
        const double g = std::abs(params.gamma[j]);
        if (g > 0.0) {
          if (m < limit) {
            trip.emplace_back(row, offset[m] + static_cast<int>(colex_rank(n.plus(j))),
                              -(static_cast<double>(m) / (m + 1.0)) * g * (n[j] + 1.0));
          } else if (closure == TruncationPolicy::Closure::PimProxy) {
            // p(n+e_j) ~ p(n) (n_j + theta q*_j)/(m + theta) (m+1)/(n_j+1)
            diag -= m * g * (n[j] + params.theta * qstar[j]) / (m + params.theta);
          }  // DropBranching: coupling above the truncation level is omitted
        }
      }
      trip.emplace_back(row, row, diag);
    }
  }
  Eigen::SparseMatrix<double> a(total, total);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd x = sparse_solve(a, rhs);
  std::vector<std::vector<double>> out(limit);
  for (int m = 1; m <= limit; ++m) {
    out[m - 1].assign(x.data() + offset[m - 1], x.data() + offset[m]);
  }
  return out;
}

}  // namespace detail

struct SelectionSolution {
  ProbTable table;
  // |log p| shift between the two truncation levels, per state, sizes 1..N.
  std::vector<std::vector<double>> log_err;
  double max_log_err = 0.0;
};

// Truncated solver for parameters with selection. Solves the full identity
// on sizes 1..n_max with the closure rule at the top, then repeats at a
// shallower truncation to report a per-state error estimate.
inline SelectionSolution solve_selection_truncated(
    const ModelParams& params, int max_size, TruncationPolicy policy = {},
    double tol = std::numeric_limits<double>::infinity()) {
  if (max_size < 1) throw Error("solve_selection_truncated: max_size must be >= 1");
  if (policy.n_max == 0) policy.n_max = max_size + 20;
  if (policy.n_max <= max_size) {
    throw Error("solve_selection_truncated: n_max must exceed max_size");
  }
  auto deep = detail::solve_joint(params, policy.n_max, policy.closure);
  const int shallow_limit = std::max(max_size + 1, policy.n_max - 2);
  auto shallow = detail::solve_joint(params, shallow_limit, policy.closure);

  SelectionSolution sol;
  sol.table = ProbTable(params.d, max_size);
  sol.log_err.resize(max_size);
  for (int m = 1; m <= max_size; ++m) {
    sol.log_err[m - 1].resize(deep[m - 1].size());
    for (std::size_t r = 0; r < deep[m - 1].size(); ++r) {
      if (!(deep[m - 1][r] > 0.0)) {
        throw SingularSystem("solve_selection_truncated: non-positive probability");
      }
      sol.table.level(m)[r] = std::log(deep[m - 1][r]);
      double e = std::abs(std::log(deep[m - 1][r]) - std::log(shallow[m - 1][r]));
      sol.log_err[m - 1][r] = e;
      sol.max_log_err = std::max(sol.max_log_err, e);
    }
  }
  if (sol.max_log_err > tol) {
    throw NonConvergedTruncation("truncation estimates differ by " +
                                 std::to_string(sol.max_log_err) + " > tolerance");
  }
  return sol;
}

// pi[i|n] from a solved table: ((n_i+1)/(|n|+1)) p(n+e_i)/p(n).
inline double pi_from_table(int i, const SampleConfig& n, const ProbTable& t) {
  if (n.dim() != t.d()) throw OutOfTable("pi_from_table: dimension mismatch");
  if (n.size() + 1 > t.max_size()) throw OutOfTable("pi_from_table: need size " +
                                                    std::to_string(n.size() + 1));
  double lp_up = t.log_p(n.plus(i));
  double lp = t.log_p(n);
  return (n[i] + 1.0) / (n.size() + 1.0) * std::exp(lp_up - lp);
}

}  // namespace asgkit
