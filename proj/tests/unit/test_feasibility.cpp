#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gnisim/feasibility.hpp"
#include "gnisim/rng.hpp"
#include "gnisim/sampling.hpp"

using namespace gnisim;

TEST_CASE("binorm_orthant: closed-form anchors") {
  CHECK(binorm_orthant(0.0, 0.0, 0.0) == Catch::Approx(0.25).margin(1e-12));
  CHECK(binorm_orthant(1.0, 0.0, 0.0) == Catch::Approx(0.5).margin(1e-12));
  CHECK(binorm_orthant(0.5, 0.0, 0.0) == Catch::Approx(1.0 / 3).margin(1e-9));
  // arcsine law at zero thresholds
  for (double rho : {-0.8, -0.3, 0.2, 0.9}) {
    double exact = 0.25 + std::asin(rho) / (2.0 * M_PI);
    CHECK(binorm_orthant(rho, 0.0, 0.0) == Catch::Approx(exact).margin(1e-8));
  }
  CHECK_THROWS_AS(binorm_orthant(1.5, 0.0, 0.0), error);
}

TEST_CASE("binorm_orthant: Monte-Carlo oracle cross-check") {
  const std::uint64_t n = 4000000;
  for (auto [rho, a, b] : {std::tuple{0.5, 0.0, 0.0}, {0.7, 0.5, -0.4}, {-0.6, -0.2, 0.9}}) {
    GaussianPairSampler s(rho, 1, 404);
    std::vector<double> x(1), y(1);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      s.pair(i, x, y);
      if (x[0] > a && y[0] > b) ++hits;
    }
    double mc = static_cast<double>(hits) / n;
    double exact = binorm_orthant(rho, a, b);
    CHECK(std::fabs(mc - exact) <= 3.0 * std::sqrt(exact * (1 - exact) / n) + 1e-9);
  }
}

TEST_CASE("binorm_orthant: symmetry and complement identities") {
  CounterRng rng(3003, 0);
  for (int rep = 0; rep < 30; ++rep) {
    double rho = 1.8 * rng.next_uniform() - 0.9;
    double a = 2.0 * rng.next_normal() * 0.5;
    double b = 2.0 * rng.next_normal() * 0.5;
    CHECK(binorm_orthant(rho, a, b) == Catch::Approx(binorm_orthant(rho, b, a)).margin(1e-8));
    // Pr[X>a] splits by the sign of Y - b under rho and the reflection -rho
    double total = binorm_orthant(rho, a, b) + binorm_orthant(-rho, a, -b);
    CHECK(total == Catch::Approx(normal_sf(a)).margin(1e-8));
  }
}

TEST_CASE("corr_bounds: anchors and ordering") {
  CorrBounds b = corr_bounds(0.5, 0.5, 0.5);
  CHECK(b.corr_min == Catch::Approx(1.0 / 3).margin(1e-9));
  CHECK(b.corr_max == Catch::Approx(2.0 / 3).margin(1e-9));
  CHECK(b.corr_max == Catch::Approx(0.5 + std::asin(0.5) / M_PI).margin(1e-9));

  CorrBounds indep = corr_bounds(0.0, 0.5, 0.5);
  CHECK(indep.corr_min == Catch::Approx(0.5).margin(1e-12));
  CHECK(indep.corr_max == Catch::Approx(0.5).margin(1e-12));

  CorrBounds tight = corr_bounds(0.999999, 0.5, 0.5);
  CHECK(tight.corr_max >= 0.999);

  CounterRng rng(606, 0);
  for (int rep = 0; rep < 25; ++rep) {
    double rho = rng.next_uniform();
    double m1 = 0.05 + 0.9 * rng.next_uniform();
    double m2 = 0.05 + 0.9 * rng.next_uniform();
    CorrBounds cb = corr_bounds(rho, m1, m2);
    CHECK(cb.corr_min <= cb.corr_max + 1e-12);
    CHECK(cb.corr_min >= -1e-12);
    CHECK(cb.corr_max <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(corr_bounds(-0.2, 0.5, 0.5), error);
}

TEST_CASE("decide_k2: feasible boundary, infeasible gap, independence") {
  BinaryTarget boundary{0.5, 0.5, 2.0 / 3};
  DecisionK2 yes = decide_k2(0.5, boundary, 1e-6);
  CHECK(yes.feasible);
  REQUIRE(yes.g_eta.has_value());
  CHECK(yes.g_eta->a == Catch::Approx(0.0).margin(1e-4));  // aligned threshold

  BinaryTarget too_high{0.5, 0.5, 0.9};
  DecisionK2 no = decide_k2(0.5, too_high, 1e-6);
  CHECK_FALSE(no.feasible);
  CHECK(no.violated == "max");
  CHECK(no.gap == Catch::Approx(0.9 - 2.0 / 3).margin(1e-6));

  double mu1 = 0.3, mu2 = 0.6;
  BinaryTarget indep{mu1, mu2, mu1 * mu2 + (1 - mu1) * (1 - mu2)};
  CHECK(decide_k2(0.0 + 1e-12, indep, 1e-6).feasible);
}

TEST_CASE("decide_k2: the returned strategy achieves eta") {
  double rho = 0.6, mu1 = 0.4, mu2 = 0.55, eta = 0.55;
  DecisionK2 d = decide_k2(rho, BinaryTarget{mu1, mu2, eta}, 1e-6);
  REQUIRE(d.feasible);
  REQUIRE(d.g_eta.has_value());
  double agree = interval_agreement(rho, d.f_threshold, d.g_eta->a, d.g_eta->b);
  CHECK(agree == Catch::Approx(eta).margin(1e-6));
  // interval mass is Bob's mean
  CHECK(normal_cdf(d.g_eta->b) - normal_cdf(d.g_eta->a) == Catch::Approx(mu2).margin(1e-9));

  // Monte-Carlo confirmation
  GaussianPairSampler s(rho, 1, 11);
  std::vector<double> x(1), y(1);
  const std::uint64_t n = 500000;
  std::uint64_t agree_n = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    s.pair(i, x, y);
    bool fu = x[0] > d.f_threshold;
    bool gv = y[0] > d.g_eta->a && y[0] <= d.g_eta->b;
    if (fu == gv) ++agree_n;
  }
  CHECK(std::fabs(static_cast<double>(agree_n) / n - eta) <= 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("decide_k2: negative rho handled by reflection") {
  DecisionK2 d = decide_k2(-0.5, BinaryTarget{0.5, 0.5, 1.0 / 3}, 1e-6);
  CHECK(d.rho_negated);
  CHECK(d.feasible);
  DecisionK2 nope = decide_k2(-0.5, BinaryTarget{0.5, 0.5, 0.9}, 1e-6);
  CHECK_FALSE(nope.feasible);
}

TEST_CASE("Borell sandwich on random strategies") {
  CounterRng rng(515, 0);
  for (int rep = 0; rep < 10; ++rep) {
    double rho = 0.1 + 0.8 * rng.next_uniform();
    double mu1 = 0.15 + 0.7 * rng.next_uniform();
    double mu2 = 0.15 + 0.7 * rng.next_uniform();
    CorrBounds cb = corr_bounds(rho, mu1, mu2);

    // random interval strategies with the prescribed means
    double ua = rng.next_uniform(), ub = rng.next_uniform();
    double a1 = normal_inv(ua * (1.0 - mu1));
    double b1 = normal_inv(ua * (1.0 - mu1) + mu1);
    double a2 = normal_inv(ub * (1.0 - mu2));
    double b2 = normal_inv(ub * (1.0 - mu2) + mu2);

    GaussianPairSampler s(rho, 1, 7000 + rep);
    std::vector<double> x(1), y(1);
    const std::uint64_t n = 100000;
    std::uint64_t agree = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      s.pair(i, x, y);
      bool fu = x[0] > a1 && x[0] <= b1;
      bool gv = y[0] > a2 && y[0] <= b2;
      if (fu == gv) ++agree;
    }
    double rate = static_cast<double>(agree) / n;
    double se = std::sqrt(0.25 / n);
    CHECK(rate >= cb.corr_min - 3.0 * se);
    CHECK(rate <= cb.corr_max + 3.0 * se);
  }
}

TEST_CASE("max_correlation: anchors") {
  FiniteJoint eq{2, 2, {0.5, 0.0, 0.0, 0.5}};
  CHECK(max_correlation(eq).rho == Catch::Approx(1.0).margin(1e-12));

  FiniteJoint prod{2, 3, {0.1, 0.2, 0.2, 0.1, 0.2, 0.2}};
  CHECK(max_correlation(prod).rho == Catch::Approx(0.0).margin(1e-10));

  for (double eps : {0.1, 0.25, 0.4}) {
    FiniteJoint bsc{2, 2, {(1 - eps) / 2, eps / 2, eps / 2, (1 - eps) / 2}};
    CHECK(max_correlation(bsc).rho == Catch::Approx(std::fabs(1 - 2 * eps)).margin(1e-10));
  }

  FiniteJoint point{2, 2, {1.0, 0.0, 0.0, 0.0}};
  MaxCorrelation mc = max_correlation(point);
  CHECK(mc.degenerate);
  CHECK(mc.rho == 0.0);

  FiniteJoint bad{2, 2, {0.7, 0.2, 0.2, 0.2}};
  CHECK_THROWS_AS(max_correlation(bad), error);
}

TEST_CASE("max_correlation: merging symbols never increases it") {
  CounterRng rng(808, 0);
  for (int rep = 0; rep < 20; ++rep) {
    int rows = 2 + static_cast<int>(rng.next_u64() % 2);
    int cols = 3;
    FiniteJoint p{rows, cols, std::vector<double>(rows * cols, 0.0)};
    double total = 0.0;
    for (double& v : p.mass) {
      v = -std::log(rng.next_uniform());
      total += v;
    }
    for (double& v : p.mass) v /= total;
    double rho = max_correlation(p).rho;

    // deterministic relabeling: merge the last two columns
    FiniteJoint merged{rows, 2, std::vector<double>(rows * 2, 0.0)};
    for (int i = 0; i < rows; ++i) {
      merged.at(i, 0) = p.at(i, 0);
      merged.at(i, 1) = p.at(i, 1) + p.at(i, 2);
    }
    CHECK(max_correlation(merged).rho <= rho + 1e-10);
  }
}
