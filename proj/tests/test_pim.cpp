#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "asgkit/pim.hpp"
#include "asgkit/rng.hpp"
#include "support/quadrature.hpp"

using namespace asgkit;

TEST_CASE("pim_log_p closed-form spot values") {
  // theta Q = (1,1): stationary density is uniform, p(n) = 1/(|n|+1)
  auto uniform = PimParams::validate(2.0, {0.5, 0.5});
  CHECK_THAT(pim_log_p(SampleConfig({3, 2}), uniform),
             Catch::Matchers::WithinAbs(std::log(1.0 / 6.0), 1e-12));

  // p(e_i) = E[X_i] = Q_i
  auto skew = PimParams::validate(1.0, {0.6, 0.4});
  CHECK_THAT(pim_log_p(SampleConfig({1, 0}), skew),
             Catch::Matchers::WithinAbs(std::log(0.6), 1e-12));

  // size-1 normalization for a few dimensions
  Rng rng(11);
  for (int d = 2; d <= 5; ++d) {
    std::vector<double> q(d);
    double s = 0.0;
    for (double& v : q) {
      v = 0.2 + rng.uniform01();
      s += v;
    }
    for (double& v : q) v /= s;
    auto pp = PimParams::validate(0.7 + rng.uniform01(), q);
    double total = 0.0;
    for (int i = 0; i < d; ++i) total += std::exp(pim_log_p(SampleConfig::unit(d, i), pp));
    REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("pim_log_p against the quadrature oracle") {
  // p(n) = binom(|n|,n) k(n) with k(n) integrated numerically against the
  // Dirichlet(theta Q) stationary density; no Gamma functions in the oracle.
  for (int d : {2, 3, 4}) {
    std::vector<double> q(d, 1.0 / d);
    q[0] += 0.1;
    q[1] -= 0.1;
    for (double theta : {0.5, 1.0, 2.0}) {
      auto pp = PimParams::validate(theta, q);
      for (int m = 1; m <= 8; ++m) {
        for (const auto& n : enumerate_configs(d, m)) {
          double k = oracle::dirichlet_moment(n.counts(), pp.alpha());
          double expected = log_multinomial(n) + std::log(k);
          REQUIRE_THAT(pim_log_p(n, pp), Catch::Matchers::WithinAbs(expected, 1e-10));
        }
      }
    }
  }
}

TEST_CASE("nested 2-d quadrature agrees with the factorized oracle (d=3)") {
  std::vector<double> b = {1.5, 0.8, 2.25};
  double direct = oracle::simplex_monomial_integral_nested3(b);
  double factorized = oracle::simplex_monomial_integral(b);
  CHECK_THAT(direct, Catch::Matchers::WithinRel(factorized, 1e-9));
}

TEST_CASE("pim_pi values and boundary") {
  auto pp = PimParams::validate(2.0, {0.5, 0.5});
  CHECK_THAT(pim_pi(0, SampleConfig({1, 1}), pp), Catch::Matchers::WithinAbs(0.5, 1e-15));
  CHECK_THAT(pim_pi(0, SampleConfig({2, 0}), pp), Catch::Matchers::WithinAbs(0.75, 1e-15));
  auto skew = PimParams::validate(1.0, {0.6, 0.4});
  CHECK(pim_pi(0, SampleConfig::zero(2), skew) == 0.6);
  CHECK(pim_pi(1, SampleConfig::zero(2), skew) == 0.4);
}

TEST_CASE("pi and p are consistent through the ratio identity") {
  // pi[i|n] = ((n_i+1)/(|n|+1)) p(n+e_i)/p(n)
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    int d = 2 + static_cast<int>(rng.next_u64() % 3);
    std::vector<double> q(d);
    double s = 0.0;
    for (double& v : q) {
      v = 0.15 + rng.uniform01();
      s += v;
    }
    for (double& v : q) v /= s;
    auto pp = PimParams::validate(0.5 + 2.0 * rng.uniform01(), q);
    std::vector<int> counts(d);
    for (int& c : counts) c = static_cast<int>(rng.next_u64() % 6);
    counts[0] += 1;
    SampleConfig n(counts);
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
      double lhs = pim_pi(i, n, pp);
      double rhs = (n[i] + 1.0) / (n.size() + 1.0) *
                   std::exp(pim_log_p(n.plus(i), pp) - pim_log_p(n, pp));
      REQUIRE_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-10));
      sum += lhs;
    }
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("dirichlet_log_density values, boundary, and normalization") {
  CHECK_THAT(dirichlet_log_density(SimplexPoint({0.3, 0.7}), {1.0, 1.0}),
             Catch::Matchers::WithinAbs(0.0, 1e-14));
  CHECK_THAT(dirichlet_log_density(SimplexPoint({0.5, 0.5}), {2.0, 2.0}),
             Catch::Matchers::WithinAbs(std::log(1.5), 1e-13));
  CHECK_THAT(dirichlet_log_density(SimplexPoint({0.2, 0.3, 0.5}), {1.0, 1.0, 1.0}),
             Catch::Matchers::WithinAbs(std::log(2.0), 1e-13));

  CHECK_THROWS_AS(dirichlet_log_density(SimplexPoint({0.0, 1.0}), {0.5, 1.0}), BoundaryPoint);
  CHECK(std::isinf(dirichlet_log_density(SimplexPoint({0.0, 1.0}), {2.0, 1.0})));

  // density integrates to 1: d = 2 and d = 3 by the oracle integrator
  for (double theta : {0.8, 2.5}) {
    auto pp2 = PimParams::validate(theta, {0.55, 0.45});
    double i2 = oracle::tanh_sinh_01([&](double /*x*/, double xl, double xr) {
      return std::exp(dirichlet_log_density(SimplexPoint({xl, xr}), pp2.alpha()));
    });
    REQUIRE_THAT(i2, Catch::Matchers::WithinAbs(1.0, 1e-9));
  }
  std::vector<double> a3 = {1.4, 0.9, 1.7};
  double i3 = oracle::simplex_monomial_integral(a3) * std::exp(-log_beta(a3));
  REQUIRE_THAT(i3, Catch::Matchers::WithinAbs(1.0, 1e-10));
}

TEST_CASE("pim_asymptotic_log_p matches the decay law") {
  SECTION("uniform case collapses to -log n") {
    auto pp = PimParams::validate(2.0, {0.5, 0.5});
    DirectionY dir({0.5, 0.5});
    for (int n : {100, 1000}) {
      CHECK_THAT(pim_asymptotic_log_p(n, dir, pp),
                 Catch::Matchers::WithinAbs(-std::log(static_cast<double>(n)), 1e-12));
    }
  }
  SECTION("norm factor") {
    auto pp = PimParams::validate(2.0, {0.5, 0.5});
    DirectionY dir({1.0, 1.0});
    // (1-d) log|y| = -log 2 and the density term vanishes for theta Q = 1
    CHECK_THAT(pim_asymptotic_log_p(1, dir, pp),
               Catch::Matchers::WithinAbs(-std::log(2.0), 1e-12));
  }
  SECTION("d=3 ratio near one at n = 3000") {
    auto pp = PimParams::validate(3.0, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    DirectionY dir({1.0 / 3, 1.0 / 3, 1.0 / 3});
    double ratio = std::exp(pim_log_p(dir.scaled_config(3000), pp) -
                            pim_asymptotic_log_p(3000, dir, pp));
    CHECK(ratio > 0.99);
    CHECK(ratio < 1.01);
  }
  SECTION("convergence improves from n=250 to n=4000") {
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
      int d = 2 + static_cast<int>(rng.next_u64() % 2);
      std::vector<double> q(d);
      double s = 0.0;
      for (double& v : q) {
        v = 0.3 + rng.uniform01();
        s += v;
      }
      for (double& v : q) v /= s;
      auto pp = PimParams::validate(0.5 + 2.0 * rng.uniform01(), q);
      std::vector<double> y(d);
      for (double& v : y) v = 0.25 * (2 + static_cast<int>(rng.next_u64() % 7));
      DirectionY dir(y);
      auto gap = [&](int n) {
        return std::abs(std::exp(pim_log_p(dir.scaled_config(n), pp) -
                                 pim_asymptotic_log_p(n, dir, pp)) -
                        1.0);
      };
      REQUIRE(gap(4000) < gap(250));
    }
  }
}

TEST_CASE("pim_log_p is stable for very large samples") {
  auto pp = PimParams::validate(1.4, {0.3, 0.7});
  DirectionY dir({0.4, 0.6});
  double lp = pim_log_p(dir.scaled_config(1000000), pp);
  REQUIRE(std::isfinite(lp));
  // at n = 10^6 the decay law holds to a fraction of a percent
  double ratio = std::exp(lp - pim_asymptotic_log_p(1000000, dir, pp));
  CHECK_THAT(ratio, Catch::Matchers::WithinAbs(1.0, 1e-2));
}
