#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gnisim/correlation.hpp"
#include "gnisim/rng.hpp"
#include "gnisim/spectrum_boost.hpp"

using namespace gnisim;

namespace {

VectorFunction constant_center(int n, int k) {
  return VectorFunction::black_box(n, k, [k](std::span<const double>, std::span<double> out) {
    for (double& v : out) v = 1.0 / k;
  });
}

VectorFunction halfspace_pair(int n = 1) {
  return vertex_function(n, 2, [](std::span<const double> x) { return x[0] > 0 ? 0 : 1; });
}

/// Spectrum of f w.r.t. the Hermite basis of degree <= d, under a fresh,
/// finer quadrature than the one the iteration used.
std::vector<std::vector<double>> independent_spectrum(const VectorFunction& f, int d,
                                                      int points_per_axis) {
  DiscreteMeasure mu = quadrature_measure(f.dim_in(), points_per_axis);
  auto indices = multi_indices_up_to(f.dim_in(), d);
  std::vector<std::vector<double>> beta(indices.size(), std::vector<double>(f.dim_out(), 0.0));
  std::vector<double> fx(f.dim_out());
  for (int p = 0; p < mu.count(); ++p) {
    auto x = mu.point(p);
    f.eval(x, fx);
    HermiteTable table(f.dim_in(), d, x);
    for (std::size_t s = 0; s < indices.size(); ++s) {
      double h = table.value(indices[s]) * mu.weights[p];
      for (int j = 0; j < f.dim_out(); ++j) beta[s][j] += h * fx[j];
    }
  }
  return beta;
}

}  // namespace

TEST_CASE("run_boost stops immediately when the target is the start point") {
  VectorFunction f = constant_center(1, 3);
  BoostBasis basis = hermite_boost_basis(1, 2);
  DiscreteMeasure mu = quadrature_measure(1, 8);
  BoostResult res = run_boost(f, basis, 0.01, mu);
  CHECK(res.iterations == 0);
  CHECK(res.final_mismatch <= 1e-20);
  CHECK(res.kappa[0] == std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3});
}

TEST_CASE("run_boost reaches a representable target and respects the budget") {
  // F = Proj of a known combination of the basis
  CounterRng rng(12, 0);
  HermiteExpansion inner(2, 2, 2);
  for (const auto& s : multi_indices_up_to(2, 2))
    inner.set(s, {0.5 + 0.5 * rng.next_normal(), 0.5 + 0.5 * rng.next_normal()});
  VectorFunction f = VectorFunction::projected_poly(inner);
  double delta = 0.01;
  BoostMatchResult res = boost_match(f, 2, delta);
  CHECK(res.details.final_mismatch <= delta);
  CHECK(res.details.iterations <= 400);
  CHECK(res.details.kappa_sq_norm <= 1.0 / (delta * delta));
}

TEST_CASE("run_boost invariants: descent, non-negativity, alignment") {
  VectorFunction f = halfspace_pair();
  double delta = 0.02;
  BoostMatchResult res = boost_match(f, 3, delta);
  const auto& trace = res.details.trace;
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CHECK(trace[i].psi >= -1e-12);
    CHECK(trace[i].alignment == Catch::Approx(trace[i].rho_sq).margin(1e-9));
    if (i + 1 < trace.size()) {
      double drop = trace[i].psi - trace[i + 1].psi;
      CHECK(drop >= trace[i].rho_sq / 4.0 - 1e-9);
      CHECK(trace[i + 1].psi < trace[i].psi);
    }
  }
  CHECK(res.details.iterations <= static_cast<int>(std::ceil(4.0 / delta)));
  CHECK(res.details.kappa_sq_norm <=
        static_cast<double>(res.details.iterations) * res.details.iterations + 1.0);
}

TEST_CASE("run_boost output is Proj of the stored coefficients") {
  VectorFunction f = halfspace_pair();
  BoostMatchResult res = boost_match(f, 3, 0.05);
  REQUIRE(res.f_proj.form() == VectorFunction::Form::kProjectedPoly);
  std::vector<double> x(1), got(2), z(2), want(2);
  for (int i = 0; i < 40; ++i) {
    gaussian_vector(5, 0, i, x);
    res.f_proj.eval(x, got);
    res.alpha.eval(x, z);
    proj_simplex(z, want);
    CHECK(got == want);
  }
}

TEST_CASE("run_boost validates the basis") {
  VectorFunction f = halfspace_pair();
  DiscreteMeasure mu = quadrature_measure(1, 10);
  BoostBasis dup = hermite_boost_basis(1, 1);
  dup.fns.push_back(dup.fns[1]);  // duplicate H_1: not orthonormal
  dup.hermite_indices->push_back((*dup.hermite_indices)[1]);
  CHECK_THROWS_AS(run_boost(f, dup, 0.1, mu), error);

  BoostBasis shifted = hermite_boost_basis(1, 1);
  shifted.fns[0] = [](std::span<const double>) { return 2.0; };  // g_1 not the constant 1
  CHECK_THROWS_AS(run_boost(f, shifted, 0.1, mu), error);
}

TEST_CASE("boost final spectrum verified by an independent quadrature oracle") {
  VectorFunction f = halfspace_pair();
  double delta = 0.05;
  int d = 3;
  BoostMatchResult res = boost_match(f, d, delta);
  auto beta_f = independent_spectrum(f, d, 2 * d + 12);
  auto beta_proj = independent_spectrum(res.f_proj, d, 2 * d + 12);
  double mismatch = 0.0;
  for (std::size_t s = 0; s < beta_f.size(); ++s)
    for (int j = 0; j < 2; ++j) {
      double dv = beta_f[s][j] - beta_proj[s][j];
      mismatch += dv * dv;
    }
  // the run guarantees <= delta under its own nodes; allow quadrature drift
  CHECK(mismatch <= delta + 0.01);
}

TEST_CASE("potential: zero at the fixed point and the two-term split") {
  VectorFunction f = halfspace_pair();
  DiscreteMeasure mu = quadrature_measure(1, 12);
  CHECK(potential(f, f, f, mu) == Catch::Approx(0.0).margin(1e-14));

  VectorFunction c = constant_center(1, 2);
  double psi0 = potential(f, c, c, mu);
  CHECK(psi0 >= 0.0);
  CHECK(psi0 <= 2.0);

  // mid-run state: Psi = E||F - F_t||^2 + 2 E<F - F_t, F_t - G_t>
  BoostMatchResult res = boost_match(f, 3, 0.2);
  VectorFunction g_t = VectorFunction::truncated_series(res.alpha);
  VectorFunction f_t = res.f_proj;
  double psi = potential(f, f_t, g_t, mu);
  std::vector<double> fv(2), ftv(2), gtv(2);
  double term1 = 0.0, term2 = 0.0;
  for (int p = 0; p < mu.count(); ++p) {
    auto x = mu.point(p);
    f.eval(x, fv);
    f_t.eval(x, ftv);
    g_t.eval(x, gtv);
    for (int j = 0; j < 2; ++j) {
      term1 += mu.weights[p] * (fv[j] - ftv[j]) * (fv[j] - ftv[j]);
      term2 += 2.0 * mu.weights[p] * (fv[j] - ftv[j]) * (ftv[j] - gtv[j]);
    }
  }
  CHECK(psi == Catch::Approx(term1 + term2).margin(1e-12));
}

TEST_CASE("boost_match on a constant vertex function") {
  VectorFunction f = VectorFunction::black_box(
      1, 2, [](std::span<const double>, std::span<double> out) {
        out[0] = 1.0;
        out[1] = 0.0;
      });
  double delta = 0.01;
  BoostMatchResult res = boost_match(f, 2, delta);
  // the iteration halves the residual and stops at mismatch <= delta, so
  // the value sits within sqrt(delta) of the vertex; only the constant
  // coefficient is ever touched
  std::vector<double> x{0.4};
  auto v = res.f_proj(x);
  CHECK(v[0] == Catch::Approx(1.0).margin(std::sqrt(delta)));
  CHECK(v[1] == Catch::Approx(0.0).margin(std::sqrt(delta)));
  for (const auto& [s, c] : res.alpha.coeffs())
    if (!s.is_zero())
      for (double cv : c) CHECK(std::fabs(cv) <= 1e-9);
  CHECK(res.details.kappa_sq_norm <= 1.0 / (delta * delta));
}

TEST_CASE("boost_match item-3 style self-consistency on a 2-D split") {
  VectorFunction f = vertex_function(2, 2, [](std::span<const double> x) {
    return x[0] > 0 ? 0 : 1;
  });
  double delta = 0.05;
  int d = 3;
  BoostMatchResult res = boost_match(f, d, delta);
  // re-expand the output and compare with the stored alpha
  auto beta = independent_spectrum(res.f_proj, d, 2 * d + 10);
  auto indices = multi_indices_up_to(2, d);
  double mismatch = 0.0;
  for (std::size_t s = 0; s < indices.size(); ++s) {
    auto a = res.alpha.coeff(indices[s]);
    for (int j = 0; j < 2; ++j) {
      double dv = beta[s][j] - a[j];
      mismatch += dv * dv;
    }
  }
  // alpha vs the *output's own* spectrum: bounded by the final rho^2 plus
  // the distance Proj moved the polynomial; the Corollary asserts <= delta
  CHECK(mismatch <= delta + 0.02);
}

TEST_CASE("fsm degree formula and variance bound") {
  CHECK(fsm_degree(1.0, 2, 0.1) == 8);  // ceil(2 log 40) = ceil(7.378)
  VectorFunction f = halfspace_pair();
  double t = std::log(2.0), delta = 0.25;
  FsmResult fsm = build_fsm(f, t, delta);
  CHECK(fsm.degree == fsm_degree(t, 2, delta));
  CHECK(fsm.delta_boost == Catch::Approx(delta * delta / 16.0).margin(1e-15));
  CHECK(fsm.max_coord_variance <= fsm.variance_bound);
  CHECK(fsm.details.final_mismatch <= fsm.delta_boost);

  // constant input reproduces itself up to the boost stop: value within
  // sqrt(delta^2/k^4)
  VectorFunction c = VectorFunction::black_box(
      1, 2, [](std::span<const double>, std::span<double> out) {
        out[0] = 1.0;
        out[1] = 0.0;
      });
  FsmResult fc = build_fsm(c, 1.0, 0.2);
  std::vector<double> x{0.1};
  auto v = fc.f_sm(x);
  CHECK(v[0] == Catch::Approx(1.0).margin(std::sqrt(fc.delta_boost) + 1e-9));
}

TEST_CASE("build_fsm correlation-table transfer at delta = 0.1") {
  VectorFunction f = halfspace_pair();
  double t = std::log(2.0), delta = 0.1, rho = std::exp(-t);
  // vertex-valued targets have kinks: give the estimator a denser grid than
  // the polynomial-exactness default
  FsmResult ff = build_fsm(f, t, delta, quadrature_measure(1, 128));
  VectorFunction g = vertex_function(1, 2, [](std::span<const double> x) {
    return x[0] > 0.35 ? 0 : 1;
  });
  FsmResult fg = build_fsm(g, t, delta, quadrature_measure(1, 128));

  const std::uint64_t n = 400000;
  JointTable before = estimate_table(f, g, rho, n, 31337);
  JointTable after = estimate_table(ff.f_sm, fg.f_sm, rho, n, 31337);
  double total = 0.0, se2 = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      total += std::fabs(after.at(i, j) - before.at(i, j));
      se2 += before.se(i, j) * before.se(i, j) + after.se(i, j) * after.se(i, j);
    }
  CHECK(total <= delta + 3.0 * std::sqrt(se2));
}
