#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "asgkit/dirichlet.hpp"
#include "support/stats.hpp"

using namespace asgkit;

TEST_CASE("dirichlet_from_gammas normalizes") {
  auto x = dirichlet_from_gammas({2.0, 6.0});
  CHECK(x[0] == 0.25);
  CHECK(x[1] == 0.75);
  CHECK_THROWS_AS(dirichlet_from_gammas({0.0, 1.0}), Error);
}

TEST_CASE("sample_dirichlet moments") {
  Rng rng(404);
  SECTION("uniform mean") {
    double s = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) s += sample_dirichlet({1.0, 1.0}, rng)[0];
    double mean = s / draws;
    double se = std::sqrt(1.0 / 12.0 / draws);
    REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(0.5, 3.0 * se));
  }
  SECTION("mean is alpha/|alpha| for alpha = (2,3,5)") {
    std::vector<double> alpha = {2.0, 3.0, 5.0};
    const int draws = 50000;
    std::vector<double> sums(3, 0.0);
    for (int i = 0; i < draws; ++i) {
      auto x = sample_dirichlet(alpha, rng);
      for (int t = 0; t < 3; ++t) sums[t] += x[t];
    }
    for (int t = 0; t < 3; ++t) {
      double target = alpha[t] / 10.0;
      double var = target * (1.0 - target) / 11.0;
      REQUIRE_THAT(sums[t] / draws,
                   Catch::Matchers::WithinAbs(target, 3.0 * std::sqrt(var / draws)));
    }
  }
  SECTION("rejects non-positive alpha") {
    CHECK_THROWS_AS(sample_dirichlet({1.0, -2.0}, rng), NonPositiveAlpha);
  }
}

TEST_CASE("the rate parameter is statistically irrelevant") {
  const int draws = 100000;
  std::vector<double> a(draws), b(draws);
  Rng r1(555), r2(556);
  for (int i = 0; i < draws; ++i) {
    a[i] = sample_dirichlet({0.8, 1.7}, r1, 1.0)[0];
    b[i] = sample_dirichlet({0.8, 1.7}, r2, 7.0)[0];
  }
  double d = oracle::ks_statistic(a, b);
  CHECK(d < oracle::ks_threshold(draws, draws));
}

TEST_CASE("clt_covariance") {
  SECTION("alpha = (1,1)") {
    auto g = clt_covariance({1.0, 1.0});
    CHECK_THAT(g.sigma(0, 0), Catch::Matchers::WithinAbs(0.125, 1e-15));
    CHECK_THAT(g.sigma(0, 1), Catch::Matchers::WithinAbs(-0.125, 1e-15));
    CHECK_THAT(g.sigma(1, 1), Catch::Matchers::WithinAbs(0.125, 1e-15));
    CHECK(g.sigma_reduced.rows() == 1);
  }
  SECTION("rows sum to zero") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      int d = 2 + static_cast<int>(rng.next_u64() % 4);
      std::vector<double> alpha(d);
      for (double& v : alpha) v = 0.2 + 4.0 * rng.uniform01();
      auto g = clt_covariance(alpha);
      for (int i = 0; i < d; ++i) {
        REQUIRE_THAT(g.sigma.row(i).sum(), Catch::Matchers::WithinAbs(0.0, 1e-15));
      }
    }
  }
  SECTION("unit-norm alpha reproduces the diffusion matrix") {
    SimplexPoint x({0.2, 0.3, 0.5});
    auto g = clt_covariance(x.coords());
    auto s = diffusion_matrix(x);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        REQUIRE_THAT(g.sigma(i, j), Catch::Matchers::WithinAbs(s(i, j), 1e-15));
      }
    }
  }
}

TEST_CASE("empirical covariance of the rescaled Dirichlet sequence") {
  // sqrt(n)(D^(n) - alpha/|alpha|) should have covariance close to Sigma(alpha)
  std::vector<double> alpha = {2.0, 3.0, 5.0};
  auto seq = AlphaSequence::linear(alpha);
  const int n = 10000;
  const int draws = 30000;
  auto an = seq.alpha_n(n);
  Rng rng(777);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(draws);
  const double sqn = std::sqrt(static_cast<double>(n));
  for (int s = 0; s < draws; ++s) {
    auto x = sample_dirichlet(an, rng);
    Eigen::VectorXd u(3);
    for (int t = 0; t < 3; ++t) u(t) = sqn * (x[t] - alpha[t] / 10.0);
    rows.push_back(u);
    mean += u;
  }
  mean /= draws;
  for (const auto& u : rows) cov += (u - mean) * (u - mean).transpose();
  cov /= draws - 1;
  auto g = clt_covariance(alpha);
  double frob = (cov - g.sigma).norm() / g.sigma.norm();
  CHECK(frob < 0.05);
}

TEST_CASE("phi_n density") {
  DirectionY dir({1.0, 1.0});
  auto seq = AlphaSequence::from_direction(dir);
  SECTION("zero outside the shifted-scaled simplex") {
    CHECK(phi_n_density({100.0}, 100, seq) == 0.0);
    CHECK(phi_n_density({-100.0}, 100, seq) == 0.0);
  }
  SECTION("symmetric rule peaks at the origin") {
    // alpha^(n) = (n+1, n+1): the interior mode maps to u = 0
    for (double u : {0.1, 0.25, 0.5, 1.0}) {
      REQUIRE(phi_n_density({0.0}, 200, seq) > phi_n_density({u}, 200, seq));
      REQUIRE(phi_n_density({0.0}, 200, seq) > phi_n_density({-u}, 200, seq));
    }
    CHECK_THAT(phi_n_density({0.37}, 200, seq),
               Catch::Matchers::WithinRel(phi_n_density({-0.37}, 200, seq), 1e-12));
  }
  SECTION("grid integral is 1 at n = 100, d = 2") {
    const int n = 100;
    const double h = 1e-3;
    double integral = 0.0;
    for (double u = -6.0; u <= 6.0; u += h) integral += h * phi_n_density({u}, n, seq);
    REQUIRE_THAT(integral, Catch::Matchers::WithinAbs(1.0, 1e-3));
  }
}

TEST_CASE("gaussian density") {
  auto lim = clt_covariance({1.0, 1.0});
  SECTION("value at the mode") {
    CHECK_THAT(gaussian_density({0.0}, lim),
               Catch::Matchers::WithinAbs(std::sqrt(8.0 / (2.0 * M_PI)), 1e-14));
  }
  SECTION("symmetry") {
    CHECK(gaussian_density({0.22}, lim) == gaussian_density({-0.22}, lim));
  }
  SECTION("normalization") {
    const double h = 1e-4;
    double integral = 0.0;
    for (double u = -4.0; u <= 4.0; u += h) integral += h * gaussian_density({u}, lim);
    REQUIRE_THAT(integral, Catch::Matchers::WithinAbs(1.0, 1e-6));
  }
  SECTION("singular covariance rejected") {
    GaussianLimit bad;
    bad.sigma = Eigen::MatrixXd::Zero(2, 2);
    bad.sigma_reduced = Eigen::MatrixXd::Zero(1, 1);
    CHECK_THROWS_AS(gaussian_density({0.0}, bad), SingularCovariance);
  }
}

TEST_CASE("sup-norm gap decreases along the n ladder") {
  SECTION("d = 2 symmetric rule") {
    auto seq = AlphaSequence::from_direction(DirectionY({1.0, 1.0}));
    double prev = 1e18;
    for (int n : {50, 200, 800, 3200}) {
      auto res = sup_norm_gap(n, seq);
      REQUIRE(res.gap < prev + 1e-12);
      prev = res.gap;
    }
    auto res = sup_norm_gap(3200, seq);
    auto sup = phi_n_sup(3200, seq);
    CHECK(res.gap <= 0.05 * sup.limit);
  }
  SECTION("d = 2 asymmetric rule") {
    auto seq = AlphaSequence::from_direction(DirectionY({1.0, 3.0}));
    double prev = 1e18;
    for (int n : {50, 200, 800}) {
      auto res = sup_norm_gap(n, seq);
      REQUIRE(res.gap < prev + 1e-12);
      prev = res.gap;
    }
  }
  SECTION("d = 3 rule (2,3,5)") {
    auto seq = AlphaSequence::linear({2.0, 3.0, 5.0});
    auto g50 = sup_norm_gap(50, seq, 6.0, 0.1);
    auto g800 = sup_norm_gap(800, seq, 6.0, 0.1);
    CHECK(g800.gap < g50.gap);
  }
  SECTION("symmetric argmax comes in a mirror pair") {
    auto seq = AlphaSequence::from_direction(DirectionY({1.0, 1.0}));
    auto res = sup_norm_gap(400, seq);
    REQUIRE(res.argmax.size() == 1);
    double here = std::abs(phi_n_density({res.argmax[0]}, 400, seq) -
                           gaussian_density({res.argmax[0]}, clt_covariance(seq.limit)));
    double mirror = std::abs(phi_n_density({-res.argmax[0]}, 400, seq) -
                             gaussian_density({-res.argmax[0]}, clt_covariance(seq.limit)));
    CHECK_THAT(here, Catch::Matchers::WithinAbs(res.gap, 1e-12));
    CHECK_THAT(mirror, Catch::Matchers::WithinAbs(res.gap, 2e-3 * res.gap + 1e-12));
  }
}

TEST_CASE("closed-form sup of phi_n and its limit") {
  SECTION("limit value for d = 2, alpha = (1,1)") {
    auto seq = AlphaSequence::from_direction(DirectionY({1.0, 1.0}));
    auto res = phi_n_sup(10000, seq);
    CHECK_THAT(res.limit, Catch::Matchers::WithinAbs(std::sqrt(4.0 / M_PI), 1e-13));
    CHECK(res.ratio > 0.99);
    CHECK(res.ratio < 1.01);
  }
  SECTION("grid search at n = 100 matches the closed form") {
    auto seq = AlphaSequence::from_direction(DirectionY({1.0, 1.0}));
    auto res = phi_n_sup(100, seq);
    double best = 0.0;
    for (double u = -3.0; u <= 3.0; u += 1e-4) {
      best = std::max(best, phi_n_density({u}, 100, seq));
    }
    CHECK_THAT(best, Catch::Matchers::WithinAbs(res.sup, 1e-6));
  }
  SECTION("boundary mode rejected") {
    auto seq = AlphaSequence::linear({0.5, 0.5});
    CHECK_THROWS_AS(phi_n_sup(1, seq), ModeOnBoundary);
  }
}

TEST_CASE("determinant identity for the diffusion matrix") {
  SECTION("d = 2 scalar case") {
    auto [lhs, rhs] = check_determinant_identity(SimplexPoint({0.5, 0.5}));
    CHECK_THAT(lhs, Catch::Matchers::WithinAbs(0.25, 1e-15));
    CHECK_THAT(rhs, Catch::Matchers::WithinAbs(0.25, 1e-15));
  }
  SECTION("d = 3 hand value") {
    auto [lhs, rhs] = check_determinant_identity(SimplexPoint({0.2, 0.3, 0.5}));
    CHECK_THAT(lhs, Catch::Matchers::WithinAbs(0.03, 1e-15));
    CHECK_THAT(rhs, Catch::Matchers::WithinAbs(0.03, 1e-15));
  }
  SECTION("random interior points, d = 4") {
    Rng rng(606);
    for (int trial = 0; trial < 100; ++trial) {
      auto x = sample_dirichlet({2.0, 2.0, 2.0, 2.0}, rng);
      auto [lhs, rhs] = check_determinant_identity(x);
      REQUIRE_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-12));
    }
  }
}
