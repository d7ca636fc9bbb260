#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gnisim/expand.hpp"
#include "gnisim/feasibility.hpp"
#include "gnisim/sampling.hpp"
#include "gnisim/simplex.hpp"

#include "../oracles.hpp"

using namespace gnisim;

namespace {

double empirical_corr(const GaussianPairSampler& s, std::uint64_t n) {
  std::vector<double> x(s.dim()), y(s.dim());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    s.pair(i, x, y);
    sxy += x[0] * y[0];
    sxx += x[0] * x[0];
    syy += y[0] * y[0];
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("sampler: perfect and zero correlation") {
  GaussianPairSampler one(1.0, 3, 42);
  std::vector<double> x(3), y(3);
  for (int i = 0; i < 100; ++i) {
    one.pair(i, x, y);
    for (int j = 0; j < 3; ++j) CHECK(x[j] == y[j]);
  }
  const std::uint64_t n = 100000;
  GaussianPairSampler zero(0.0, 1, 43);
  CHECK(std::fabs(empirical_corr(zero, n)) <= 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sampler: rho=0.5 hits the 3-sigma band, cross-checked by a second RNG") {
  const std::uint64_t n = 1000000;
  GaussianPairSampler s(0.5, 1, 7);
  double corr = empirical_corr(s, n);
  CHECK(std::fabs(corr - 0.5) <= 0.004);

  oracles::StdNormalPairs alt(7);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    double a, b;
    alt.pair(0.5, a, b);
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  double corr_alt = sxy / std::sqrt(sxx * syy);
  CHECK(std::fabs(corr_alt - 0.5) <= 0.004);
  CHECK(std::fabs(corr - corr_alt) <= 0.008);
}

TEST_CASE("sampler: deterministic and random-access") {
  GaussianPairSampler a(0.3, 2, 11), b(0.3, 2, 11);
  std::vector<double> x1(2), y1(2), x2(2), y2(2);
  a.pair(5, x1, y1);
  b.pair(5, x2, y2);
  CHECK(x1 == x2);
  CHECK(y1 == y2);
  std::vector<double> xs, ys;
  a.sample_pairs(8, xs, ys);
  a.pair(7, x1, y1);
  CHECK(xs[7 * 2] == x1[0]);
  CHECK(ys[7 * 2 + 1] == y1[1]);
  CHECK_THROWS_AS(GaussianPairSampler(1.5, 1, 0), error);
}

TEST_CASE("noise_apply black box agrees with the closed form for halfspaces") {
  // P_t 1_{y > kappa}(x) = Phi((e^{-t} x - kappa) / sqrt(1 - e^{-2t}))
  double t = std::log(2.0), kappa = 0.4;
  VectorFunction f = vertex_function(1, 2, [kappa](std::span<const double> x) {
    return x[0] > kappa ? 0 : 1;
  });
  VectorFunction pt = noise_apply(f, t, 40000, 202);
  double rho = std::exp(-t), spread = std::sqrt(1 - rho * rho);
  for (double x : {-1.0, 0.0, 0.7, 2.0}) {
    std::vector<double> out = pt(std::span<const double>(&x, 1));
    double exact = normal_cdf((rho * x - kappa) / spread);
    double se = std::sqrt(exact * (1 - exact) / 40000.0);
    CHECK(std::fabs(out[0] - exact) <= std::max(3.0 * se, 1e-3));
    CHECK(out[0] + out[1] == Catch::Approx(1.0).margin(1e-12));
  }
  CHECK_THROWS_AS(noise_apply(f, -1.0, 10, 0), error);
}

TEST_CASE("noise_apply black box is a deterministic function") {
  VectorFunction f = vertex_function(1, 2, [](std::span<const double> x) {
    return x[0] > 0 ? 0 : 1;
  });
  VectorFunction pt = noise_apply(f, 0.5, 64, 5);
  double x = 0.33;
  auto a = pt(std::span<const double>(&x, 1));
  auto b = pt(std::span<const double>(&x, 1));
  CHECK(a == b);
}

TEST_CASE("noise operator keeps simplex range on samples") {
  HermiteExpansion e(2, 3, 2);
  CounterRng rng(88, 0);
  for (const auto& s : multi_indices_up_to(2, 2))
    e.set(s, {rng.next_normal(), rng.next_normal(), rng.next_normal()});
  VectorFunction f = VectorFunction::projected_poly(std::move(e));
  VectorFunction pt = noise_apply(f, 0.7, 500, 31);
  std::vector<double> x(2), out(3);
  for (int i = 0; i < 50; ++i) {
    gaussian_vector(77, 0, i, x);
    pt.eval(x, out);
    CHECK(l1_dist_to_simplex(out) <= 1e-9);
  }
}

TEST_CASE("black-box noise stability matches the orthant probability") {
  // E[1_{X>a} (P_t 1_{.>b})(X)] = Pr[X > a, Y > b] at rho = e^{-t}
  double t = 0.6, a = 0.2, b = -0.3;
  double rho = std::exp(-t);
  VectorFunction g = vertex_function(1, 2, [b](std::span<const double> x) {
    return x[0] > b ? 0 : 1;
  });
  VectorFunction ptg = noise_apply(g, t, 2000, 17);
  const std::uint64_t n = 20000;
  double acc = 0.0;
  std::vector<double> x(1), out(2);
  for (std::uint64_t i = 0; i < n; ++i) {
    gaussian_vector(123, 0, i, x);
    if (x[0] > a) {
      ptg.eval(x, out);
      acc += out[0];
    }
  }
  double estimate = acc / n;
  double exact = binorm_orthant(rho, a, b);
  CHECK(std::fabs(estimate - exact) <= 3.0 * std::sqrt(0.25 / n) + 3.0 / std::sqrt(2000.0 * n));
}
