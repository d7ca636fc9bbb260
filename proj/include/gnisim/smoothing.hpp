#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "gnisim/bernstein.hpp"
#include "gnisim/correlation.hpp"
#include "gnisim/errors.hpp"
#include "gnisim/ppf.hpp"
#include "gnisim/sampling.hpp"
#include "gnisim/simplex.hpp"
#include "gnisim/spectrum_boost.hpp"
#include "gnisim/vector_function.hpp"

namespace gnisim {

struct SmoothOptions {
  std::uint64_t report_samples = 1000000;  // N for the measured items
  std::uint64_t quantile_samples = 100000; // for the fallback radius
  std::uint64_t check_samples = 100000;    // smooth_poly tail estimate
  double accept_multiplier = 3.0;          // c in the O(k*delta) acceptance bounds
  long long degree_cap = 1000000;          // composed symbolic degree cap
  std::size_t tensor_budget = 4000000;     // value-tensor entries per outer coordinate
  unsigned threads = 0;
};

struct SmoothPolyInfo {
  int inner_degree = 0;
  double sigma_used = 0.0;          // max inner coordinate std actually present
  double sigma_worst_case = 0.0;    // k^4 / delta^2
  double radius_formula = 0.0;      // log^{d/2}(2dk/delta) * sigma_used
  double radius_used = 0.0;
  long long bernstein_degree_formula = 0;  // k * 4 r^2 * 16 / delta^2
  long long bernstein_degree_used = 0;
  long long composed_degree_formula = 0;   // d * k * bernstein degree
  long long composed_degree_used = 0;
  bool degree_blowup = false;
  double tail_prob = 0.0;  // measured Pr[||f_sm - f_sm'||_inf > delta/4]
  double tail_se = 0.0;
};

struct SmoothPolyResult {
  std::vector<ScalarPoly> coords;  // k composed polynomials p'_{f,s}
  std::shared_ptr<const HermiteExpansion> inner;
  SmoothPolyInfo info;
};

/// Replace Proj by its Bernstein approximant on a ball around the inner
/// polynomials' means: f_sm' = p_sm o (p_{f,1..k}). The paper-formula radius
/// and degree are always computed; if the composed degree bursts the cap (or
/// the value tensor the budget), the run completes with an empirical-quantile
/// radius and the budgeted degree, flagged as DEGREE_BLOWUP in the info.
inline SmoothPolyResult smooth_poly(const VectorFunction& f_sm, double delta,
                                    std::uint64_t seed = 0x73706f6c,
                                    const SmoothOptions& opts = {}) {
  require(f_sm.form() == VectorFunction::Form::kProjectedPoly, errc::invalid_input,
          "smooth_poly: input must be a projected polynomial");
  require(delta > 0.0, errc::invalid_input, "smooth_poly: delta <= 0");
  const HermiteExpansion& inner = *f_sm.series();
  const int n = inner.dim_in(), k = inner.dim_out();

  SmoothPolyInfo info;
  for (const auto& [s, c] : inner.coeffs()) info.inner_degree = std::max(info.inner_degree, s.order());
  const int d = std::max(info.inner_degree, 1);
  info.sigma_worst_case = std::pow(static_cast<double>(k), 4) / (delta * delta);
  double max_var = 0.0;
  for (int j = 0; j < k; ++j) max_var = std::max(max_var, inner.variance(j));
  require(max_var <= info.sigma_worst_case * info.sigma_worst_case * (1.0 + 1e-9),
          errc::precondition_violated, "smooth_poly: inner variance exceeds k^8/delta^4");
  info.sigma_used = std::sqrt(max_var);

  std::vector<double> mu = inner.mean();
  info.radius_formula =
      std::pow(std::log(2.0 * d * k / delta), d / 2.0) * std::max(info.sigma_used, 1e-3);
  info.bernstein_degree_formula = ball_degree(delta / 4.0, info.radius_formula, k);
  info.composed_degree_formula = static_cast<long long>(d) * k * info.bernstein_degree_formula;

  double tensor_cap_degree = std::floor(std::pow(static_cast<double>(opts.tensor_budget), 1.0 / k)) - 1.0;
  info.degree_blowup = info.composed_degree_formula > opts.degree_cap ||
                       static_cast<double>(info.bernstein_degree_formula) > tensor_cap_degree;

  if (!info.degree_blowup) {
    info.radius_used = info.radius_formula;
    info.bernstein_degree_used = info.bernstein_degree_formula;
  } else {
    // empirical radius: (1 - delta/8) quantile of the inner deviation, cushioned
    std::vector<double> dev(opts.quantile_samples);
    std::vector<double> x(n), px(k);
    for (std::uint64_t i = 0; i < opts.quantile_samples; ++i) {
      gaussian_vector(seed, 0x7175, i, x);
      inner.eval(x, px);
      double m = 0.0;
      for (int j = 0; j < k; ++j) m = std::max(m, std::fabs(px[j] - mu[j]));
      dev[i] = m;
    }
    std::size_t q = static_cast<std::size_t>((1.0 - delta / 8.0) * (dev.size() - 1));
    std::nth_element(dev.begin(), dev.begin() + q, dev.end());
    info.radius_used = std::max(1.3 * dev[q] * std::sqrt(static_cast<double>(k)), 1e-3);
    info.bernstein_degree_used =
        std::min<long long>(ball_degree(delta / 4.0, info.radius_used, k),
                            static_cast<long long>(tensor_cap_degree));
    info.bernstein_degree_used = std::max<long long>(info.bernstein_degree_used, 8);
  }
  info.composed_degree_used = static_cast<long long>(d) * k * info.bernstein_degree_used;

  // outer approximants of Proj's coordinates, one shared grid pass; for
  // k = 2 the projection's coordinates sum to 1 and the operator preserves
  // affine relations, so one tensor serves both coordinates
  auto proj_fn = [](std::span<const double> z, std::span<double> out) { proj_simplex(z, out); };
  const int outputs = k == 2 ? 1 : k;
  std::vector<BernsteinApprox> outers =
      bp_on_ball_multi(proj_fn, outputs, mu, info.radius_used, info.bernstein_degree_used);

  SmoothPolyResult res;
  res.inner = std::make_shared<const HermiteExpansion>(inner);
  const int symbolic_degree =
      static_cast<int>(std::min<long long>(info.composed_degree_used, 1 << 30));
  if (k == 2) {
    ComposedPoly c0{res.inner, std::make_shared<const BernsteinApprox>(std::move(outers[0])), 1.0,
                    0.0};
    ScalarPoly p0 = ScalarPoly::from_composed(std::move(c0), symbolic_degree);
    res.coords.push_back(p0);
    res.coords.push_back(p0.affine(-1.0, 1.0));
  } else {
    for (int s = 0; s < k; ++s) {
      ComposedPoly c{res.inner, std::make_shared<const BernsteinApprox>(std::move(outers[s])), 1.0,
                     0.0};
      res.coords.push_back(ScalarPoly::from_composed(std::move(c), symbolic_degree));
    }
  }

  // measured tail: Pr[||f_sm - f_sm'||_inf > delta/4]
  std::vector<double> x(n), a(k), z(k);
  std::uint64_t bad = 0;
  for (std::uint64_t i = 0; i < opts.check_samples; ++i) {
    gaussian_vector(seed, 0x746c, i, x);
    f_sm.eval(x, a);
    double worst = 0.0;
    for (int s = 0; s < k; ++s) worst = std::max(worst, std::fabs(res.coords[s](x) - a[s]));
    if (worst > delta / 4.0) ++bad;
  }
  info.tail_prob = static_cast<double>(bad) / opts.check_samples;
  info.tail_se = std::sqrt(std::max(info.tail_prob * (1.0 - info.tail_prob), 1e-12) /
                           opts.check_samples);
  res.info = info;
  return res;
}

/// One function's half of the pipeline: spectrum-match, polynomialize,
/// threshold into a PPF staircase. Depends only on (f, t, k, delta, seed).
struct SmoothOneResult {
  PpfMixture mixture;
  FsmResult fsm;
  SmoothPolyResult poly;
  double eta = 0.0;
  int m = 0;
};

inline SmoothOneResult smooth_one(const VectorFunction& f, double t, double delta,
                                  std::uint64_t seed, const SmoothOptions& opts = {}) {
  require(t > 0.0 && delta > 0.0, errc::invalid_input, "smooth: t, delta must be positive");
  const int k = f.dim_out();
  SmoothOneResult out;
  // The spectral tolerance delta^2/k^4 is small, and vertex-valued targets
  // have kinks the polynomial-exactness node count underresolves; use a
  // denser grid in low dimension, Monte Carlo beyond the quadrature cap.
  std::optional<DiscreteMeasure> measure;
  const int n = f.dim_in();
  const int d0 = fsm_degree(t, k, delta);
  if (n <= 2)
    measure = quadrature_measure(n, std::max(2 * d0 + 4, 96));
  else if (n > kMaxQuadratureDim)
    measure = monte_carlo_measure(n, 1 << 17, substream(seed, 0x626d));
  out.fsm = build_fsm(f, t, delta, std::move(measure));
  out.poly = smooth_poly(out.fsm.f_sm, delta, substream(seed, 0x7370), opts);
  out.eta = delta / k;
  out.m = static_cast<int>(std::ceil(1.0 / out.eta));

  // Staircase thresholds eta*j, j = 1..m, weight 1/m: coordinate s becomes
  // the m-step approximation of clamp(p'_s, 0, 1). Each step is balanced per
  // the (d_0, delta) convention: unit variance, mean clamped at the bound.
  const double bound = ppf_balance_mean_bound(out.fsm.degree, delta);
  out.mixture.dim_in = f.dim_in();
  out.mixture.k = k;
  for (int s = 0; s < k; ++s) {
    ScalarPoly::Moments mom =
        out.poly.coords[s].moments(1 << 16, substream(seed, 0x6d6f, s));
    double sigma = std::sqrt(std::max(mom.variance, 1e-12));
    PpfMixture::Group g{out.poly.coords[s], s, {}};
    for (int j = 1; j <= out.m; ++j) {
      // balanced form of p'_s - eta*j: scale to unit variance, then clamp
      // the mean if it exceeds the (d_0, delta) bound
      double scale = 1.0 / sigma;
      double shift = -out.eta * j / sigma;
      double mean = (mom.mean - out.eta * j) / sigma;
      BalanceTag tag{out.fsm.degree, delta, false, mom.exact};
      if (std::fabs(mean) > bound) {
        shift += -mean + bound * (mean > 0 ? 1.0 : -1.0);
        tag.mean_clamped = true;
      }
      g.steps.push_back(PpfMixture::Step{1.0 / out.m, scale, shift, tag});
    }
    out.mixture.groups.push_back(std::move(g));
  }
  return out;
}

/// Measured Lemma-5 items for one (f_1, g_1) pair.
struct SmoothingReport {
  int k = 0;
  int d0 = 0;           // spectrum degree recorded by the matcher
  int m = 0;            // staircase steps per coordinate
  double eta = 0.0;
  double t = 0.0;
  double delta = 0.0;
  std::uint64_t samples = 0;

  bool orthant_ok = true;   // item 1: outputs in the positive orthant
  bool linf_ok = true;      // item 2: sup-norm <= 1
  double delta_region_prob_f = 0.0, delta_region_prob_f_se = 0.0;  // item 3
  double delta_region_prob_g = 0.0, delta_region_prob_g_se = 0.0;
  double mean_drift_f = 0.0, mean_drift_f_se = 0.0;  // item 4, l1
  double mean_drift_g = 0.0, mean_drift_g_se = 0.0;
  std::vector<double> corr_drift;     // item 5: |E[f1 Pt g1] - E[f Pt g]|, k x k
  std::vector<double> corr_drift_se;  // combined SEs
  std::size_t ppf_count = 0;          // item 6: k*m terms per function
  long long ppf_degree = 0;           // composed symbolic degree of the PPF polynomials

  std::vector<std::string> violations;  // items beyond bound + multiplier tolerance
};

struct SmoothResult {
  SmoothOneResult f_side;
  SmoothOneResult g_side;
  VectorFunction f1;
  VectorFunction g1;
  SmoothingReport report;
};

namespace detail {

struct ReportAccum {
  std::vector<double> mean_f, mean_g, mean_f1, mean_g1;
  std::vector<double> table_orig, table_new;
  double dist_f1 = 0.0, dist_g1 = 0.0;  // exceedance indicators
  double min_coord = 0.0, max_coord = 1.0;

  explicit ReportAccum(int k)
      : mean_f(k, 0.0), mean_g(k, 0.0), mean_f1(k, 0.0), mean_g1(k, 0.0),
        table_orig(k * k, 0.0), table_new(k * k, 0.0) {}
};

}  // namespace detail

/// Full Lemma-5 pipeline for a pair of [k]-valued (vertex-embedded)
/// functions, with every item measured at N samples. The construction of
/// f_1 never sees g, and vice versa: identical (f, t, k, delta, seed) give
/// bit-identical mixtures regardless of the partner.
inline SmoothResult smooth(const VectorFunction& f, const VectorFunction& g, double t,
                           double delta, std::uint64_t seed, const SmoothOptions& opts = {}) {
  require(f.dim_in() == g.dim_in() && f.dim_out() == g.dim_out(), errc::dim_mismatch,
          "smooth: f and g must share dimensions");
  const int n = f.dim_in(), k = f.dim_out();
  SmoothResult res;
  res.f_side = smooth_one(f, t, delta, substream(seed, 0x66), opts);
  res.g_side = smooth_one(g, t, delta, substream(seed, 0x67), opts);
  res.f1 = VectorFunction::ppf_mixture(res.f_side.mixture);
  res.g1 = VectorFunction::ppf_mixture(res.g_side.mixture);

  SmoothingReport rep;
  rep.k = k;
  rep.d0 = res.f_side.fsm.degree;
  rep.m = res.f_side.m;
  rep.eta = res.f_side.eta;
  rep.t = t;
  rep.delta = delta;
  rep.samples = opts.report_samples;
  rep.ppf_count = res.f_side.mixture.term_count();
  rep.ppf_degree = res.f_side.poly.info.composed_degree_used;

  // One fused measurement pass over rho-correlated pairs, batch means for
  // the errors; expensive mixture evaluations happen once per sample side.
  const double rho = std::exp(-t);
  GaussianPairSampler sampler(rho, n, substream(seed, 0x726570));
  const std::uint64_t N = opts.report_samples;
  const int B = kBatchCount;
  const std::uint64_t base = N / B, extra = N % B;
  std::vector<detail::ReportAccum> acc(B, detail::ReportAccum(k));
  const double region = k * delta / 2.0;

  auto work = [&](int b) {
    std::uint64_t lo = static_cast<std::uint64_t>(b) * base + std::min<std::uint64_t>(b, extra);
    std::uint64_t hi = lo + base + (static_cast<std::uint64_t>(b) < extra ? 1 : 0);
    std::vector<double> x(n), y(n), fx(k), gy(k), f1x(k), g1y(k);
    detail::ReportAccum& a = acc[b];
    for (std::uint64_t i = lo; i < hi; ++i) {
      sampler.pair(i, x, y);
      f.eval(x, fx);
      g.eval(y, gy);
      res.f1.eval(x, f1x);
      res.g1.eval(y, g1y);
      for (int j = 0; j < k; ++j) {
        a.mean_f[j] += fx[j];
        a.mean_g[j] += gy[j];
        a.mean_f1[j] += f1x[j];
        a.mean_g1[j] += g1y[j];
        a.min_coord = std::min({a.min_coord, f1x[j], g1y[j]});
        a.max_coord = std::max({a.max_coord, f1x[j], g1y[j]});
      }
      for (int i1 = 0; i1 < k; ++i1)
        for (int i2 = 0; i2 < k; ++i2) {
          a.table_orig[i1 * k + i2] += fx[i1] * gy[i2];
          a.table_new[i1 * k + i2] += f1x[i1] * g1y[i2];
        }
      if (l1_dist_to_simplex(f1x) > region) a.dist_f1 += 1.0;
      if (l1_dist_to_simplex(g1y) > region) a.dist_g1 += 1.0;
    }
    double count = static_cast<double>(hi - lo);
    for (int j = 0; j < k; ++j) {
      a.mean_f[j] /= count;
      a.mean_g[j] /= count;
      a.mean_f1[j] /= count;
      a.mean_g1[j] /= count;
    }
    for (int c = 0; c < k * k; ++c) {
      a.table_orig[c] /= count;
      a.table_new[c] /= count;
    }
    a.dist_f1 /= count;
    a.dist_g1 /= count;
  };

  unsigned nthreads = std::min<unsigned>(resolve_threads(opts.threads), B);
  if (nthreads <= 1) {
    for (int b = 0; b < B; ++b) work(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned th = 0; th < nthreads; ++th)
      pool.emplace_back([&, th] {
        for (int b = static_cast<int>(th); b < B; b += static_cast<int>(nthreads)) work(b);
      });
    for (auto& th : pool) th.join();
  }

  auto batch_stats = [&](auto getter) {
    double mean = 0.0;
    for (int b = 0; b < B; ++b) mean += getter(acc[b]);
    mean /= B;
    double var = 0.0;
    for (int b = 0; b < B; ++b) {
      double d = getter(acc[b]) - mean;
      var += d * d;
    }
    return std::pair<double, double>(mean, std::sqrt(var / (B - 1.0) / B));
  };

  double drift_f = 0.0, drift_f_se2 = 0.0, drift_g = 0.0, drift_g_se2 = 0.0;
  for (int j = 0; j < k; ++j) {
    auto [df, se_f] = batch_stats([&](const detail::ReportAccum& a) { return a.mean_f1[j] - a.mean_f[j]; });
    drift_f += std::fabs(df);
    drift_f_se2 += se_f * se_f;
    auto [dg, se_g] = batch_stats([&](const detail::ReportAccum& a) { return a.mean_g1[j] - a.mean_g[j]; });
    drift_g += std::fabs(dg);
    drift_g_se2 += se_g * se_g;
  }
  rep.mean_drift_f = drift_f;
  rep.mean_drift_f_se = std::sqrt(drift_f_se2);
  rep.mean_drift_g = drift_g;
  rep.mean_drift_g_se = std::sqrt(drift_g_se2);

  rep.corr_drift.assign(k * k, 0.0);
  rep.corr_drift_se.assign(k * k, 0.0);
  for (int c = 0; c < k * k; ++c) {
    auto [dv, se] = batch_stats([&](const detail::ReportAccum& a) { return a.table_new[c] - a.table_orig[c]; });
    rep.corr_drift[c] = std::fabs(dv);
    rep.corr_drift_se[c] = se;
  }

  std::tie(rep.delta_region_prob_f, rep.delta_region_prob_f_se) =
      batch_stats([](const detail::ReportAccum& a) { return a.dist_f1; });
  std::tie(rep.delta_region_prob_g, rep.delta_region_prob_g_se) =
      batch_stats([](const detail::ReportAccum& a) { return a.dist_g1; });

  double min_coord = 0.0, max_coord = 1.0;
  for (const auto& a : acc) {
    min_coord = std::min(min_coord, a.min_coord);
    max_coord = std::max(max_coord, a.max_coord);
  }
  rep.orthant_ok = min_coord >= -1e-12;
  rep.linf_ok = max_coord <= 1.0 + 1e-12;

  const double c = opts.accept_multiplier;
  if (!rep.orthant_ok) rep.violations.push_back("item1: output left the positive orthant");
  if (!rep.linf_ok) rep.violations.push_back("item2: sup-norm exceeded 1");
  if (rep.delta_region_prob_f > delta / 2.0 + 3.0 * rep.delta_region_prob_f_se)
    rep.violations.push_back("item3: f_1 simplex-neighborhood probability");
  if (rep.delta_region_prob_g > delta / 2.0 + 3.0 * rep.delta_region_prob_g_se)
    rep.violations.push_back("item3: g_1 simplex-neighborhood probability");
  if (rep.mean_drift_f > c * k * delta + 3.0 * rep.mean_drift_f_se)
    rep.violations.push_back("item4: f mean drift");
  if (rep.mean_drift_g > c * k * delta + 3.0 * rep.mean_drift_g_se)
    rep.violations.push_back("item4: g mean drift");
  for (int cell = 0; cell < k * k; ++cell)
    if (rep.corr_drift[cell] > c * k * delta + 3.0 * rep.corr_drift_se[cell]) {
      rep.violations.push_back("item5: correlation drift at cell " + std::to_string(cell));
      break;
    }

  res.report = std::move(rep);
  return res;
}

}  // namespace gnisim
