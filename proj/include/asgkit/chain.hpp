// The typed ASG block-counting jump chain: exact one-step transition
// distributions, trajectory simulation back to the most recent common
// ancestor, and the probabilities of the scaled chain.
//
// Transitions out of n, with D = sum_r n_r |gamma_r| + |n|(|n|-1+theta):
//   v = e_j        coalescence   n_j(n_j-1)/D / pi[j|n-e_j]
//   v = e_j - e_i  mutation      theta P_ij n_j / D * pi[i|n-e_j]/pi[j|n-e_j]
//   v = -e_j       branching     |n||gamma_j|/D * pi[j|n]
// Entries with zero numerator are omitted. The frozen entry order is
// coalescences by j, mutations by (j, i), branchings by j.
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "asgkit/core.hpp"
#include "asgkit/diffusion.hpp"
#include "asgkit/pim.hpp"
#include "asgkit/recursion.hpp"
#include "asgkit/rng.hpp"

namespace asgkit {

class PiOutOfRange : public Error {
 public:
  using Error::Error;
};

class PiProvider {
 public:
  virtual ~PiProvider() = default;
  // pi[i|n]; n may be the zero configuration.
  virtual double pi(int i, const SampleConfig& n) const = 0;
  // Largest |n| for which pi[.|n] can be served.
  virtual int max_queryable_size() const { return std::numeric_limits<int>::max(); }
  virtual std::string describe() const = 0;
};

class PimPiProvider final : public PiProvider {
 public:
  explicit PimPiProvider(PimParams pp) : pp_(std::move(pp)) {}
  double pi(int i, const SampleConfig& n) const override { return pim_pi(i, n, pp_); }
  std::string describe() const override { return "pim"; }

 private:
  PimParams pp_;
};

class TablePiProvider final : public PiProvider {
 public:
  explicit TablePiProvider(const ProbTable& t) : table_(&t) {}
  double pi(int i, const SampleConfig& n) const override {
    if (n.size() + 1 > table_->max_size()) {
      throw PiOutOfRange("pi provider: table too small for state " + n.str());
    }
    return pi_from_table(i, n, *table_);
  }
  int max_queryable_size() const override { return table_->max_size() - 1; }
  std::string describe() const override { return "table"; }

 private:
  const ProbTable* table_;
};

// Monte Carlo provider: pi[i|n] = k(n+e_i)/k(n) on a snapshot of the
// stationary ensemble, so it is safe to share read-only.
class McPiProvider final : public PiProvider {
 public:
  explicit McPiProvider(const StationaryEnsemble& ens) : d_(ens.d) {
    if (ens.size() == 0) throw EmptyEnsemble("McPiProvider: no samples");
    samples_.reserve(ens.size());
    ens.for_each([&](const std::vector<double>& x) { samples_.push_back(x); });
  }

  double pi(int i, const SampleConfig& n) const override {
    double num = 0.0, den = 0.0;
    for (const auto& x : samples_) {
      double prod = 1.0;
      for (int t = 0; t < d_; ++t) {
        if (n[t] > 0) prod *= std::pow(x[t], n[t]);
      }
      den += prod;
      num += prod * x[i];
    }
    return num / den;
  }
  std::string describe() const override { return "mc"; }

 private:
  int d_;
  std::vector<std::vector<double>> samples_;
};

struct Jump {
  enum class Kind { Coalescence, Mutation, Branching };
  Kind kind = Kind::Coalescence;
  int j = 0;  // coalescing/branching type, or mutation target seen backwards
  int i = 0;  // mutation source type (i -> j forwards in time)

  std::string label() const {
    switch (kind) {
      case Kind::Coalescence: return "coalescence(" + std::to_string(j + 1) + ")";
      case Kind::Mutation:
        return "mutation(" + std::to_string(i + 1) + "->" + std::to_string(j + 1) + ")";
      case Kind::Branching: return "branching(" + std::to_string(j + 1) + ")";
    }
    return "?";
  }

  friend bool operator==(const Jump& a, const Jump& b) {
    return a.kind == b.kind && a.j == b.j && (a.kind != Jump::Kind::Mutation || a.i == b.i);
  }
};

struct TransitionEntry {
  Jump jump;
  double prob = 0.0;
};

struct TransitionDistribution {
  SampleConfig state;
  double denominator = 0.0;
  std::vector<TransitionEntry> entries;

  double total() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.prob;
    return s;
  }

  double prob_of(const Jump& v) const {
    for (const auto& e : entries) {
      if (e.jump == v) return e.prob;
    }
    return 0.0;
  }

  // The state reached by jump v: n - v.
  SampleConfig apply(const Jump& v) const {
    switch (v.kind) {
      case Jump::Kind::Coalescence: return state.minus(v.j);
      case Jump::Kind::Mutation: return state.minus(v.j).plus(v.i);
      case Jump::Kind::Branching: return state.plus(v.j);
    }
    throw Error("apply: bad jump");
  }
};

inline TransitionDistribution transition_distribution(const SampleConfig& n,
                                                      const ModelParams& params,
                                                      const PiProvider& pi) {
  if (n.dim() != params.d) throw Error("transition_distribution: dimension mismatch");
  if (n.is_zero()) throw Error("transition_distribution: zero configuration");
  const int d = params.d;
  const double m = n.size();
  double denom = m * (m - 1.0 + params.theta);
  for (int r = 0; r < d; ++r) denom += n[r] * std::abs(params.gamma[r]);

  TransitionDistribution dist{n, denom, {}};
  for (int j = 0; j < d; ++j) {  // coalescence of a type-j lineage
    if (n[j] < 2) continue;
    double p = n[j] * (n[j] - 1.0) / denom / pi.pi(j, n.minus(j));
    dist.entries.push_back({{Jump::Kind::Coalescence, j, 0}, p});
  }
  for (int j = 0; j < d; ++j) {  // mutation i -> j, observed as e_j - e_i
    if (n[j] < 1) continue;
    const SampleConfig base = n.minus(j);
    const double pij_base = pi.pi(j, base);
    for (int i = 0; i < d; ++i) {
      if (params.p(i, j) == 0.0) continue;
      double p = params.theta * params.p(i, j) * n[j] / denom * pi.pi(i, base) / pij_base;
      dist.entries.push_back({{Jump::Kind::Mutation, j, i}, p});
    }
  }
  for (int j = 0; j < d; ++j) {  // branching of a type-j lineage
    if (params.gamma[j] == 0.0) continue;
    double p = m * std::abs(params.gamma[j]) / denom * pi.pi(j, n);
    dist.entries.push_back({{Jump::Kind::Branching, j, 0}, p});
  }
  return dist;
}

// One jump, drawn by inverse CDF over the frozen entry order.
inline std::pair<SampleConfig, Jump> step(const SampleConfig& n, const ModelParams& params,
                                          const PiProvider& pi, Rng& rng) {
  TransitionDistribution dist = transition_distribution(n, params, pi);
  if (dist.entries.empty()) throw Error("step: no transitions available");
  double u = rng.uniform01() * dist.total();
  double acc = 0.0;
  for (const auto& e : dist.entries) {
    acc += e.prob;
    if (u < acc) return {dist.apply(e.jump), e.jump};
  }
  const auto& last = dist.entries.back();
  return {dist.apply(last.jump), last.jump};
}

struct ChainTrajectory {
  std::vector<SampleConfig> states;
  std::vector<Jump> events;  // events[k] moves states[k] to states[k+1]
  bool truncated = false;    // max_steps hit before a single lineage was left
  std::uint64_t seed = 0;
};

inline ChainTrajectory simulate_to_mrca(const SampleConfig& start, const ModelParams& params,
                                        const PiProvider& pi, Rng& rng,
                                        long long max_steps = 1000000) {
  if (start.is_zero()) throw Error("simulate_to_mrca: zero start state");
  ChainTrajectory traj;
  traj.states.push_back(start);
  while (traj.states.back().size() > 1) {
    if (static_cast<long long>(traj.events.size()) >= max_steps) {
      traj.truncated = true;
      break;
    }
    auto [next, jump] = step(traj.states.back(), params, pi, rng);
    traj.states.push_back(std::move(next));
    traj.events.push_back(jump);
  }
  return traj;
}

inline ChainTrajectory simulate_to_mrca(const SampleConfig& start, const ModelParams& params,
                                        const PiProvider& pi, std::uint64_t seed,
                                        long long max_steps = 1000000) {
  Rng rng(seed);
  ChainTrajectory traj = simulate_to_mrca(start, params, pi, rng, max_steps);
  traj.seed = seed;
  return traj;
}

// rho^(n)(v | y^(n)) = p(n y^(n) - v | n y^(n)), the transition probability
// of the scaled chain at the lattice state n y^(n).
inline double scaled_transition(const Jump& v, int n, const DirectionY& dir,
                                const ModelParams& params, const PiProvider& pi) {
  return transition_distribution(dir.scaled_config(n), params, pi).prob_of(v);
}

}  // namespace asgkit
