#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "gnisim/errors.hpp"
#include "gnisim/poly.hpp"
#include "gnisim/sampling.hpp"
#include "gnisim/vector_function.hpp"

namespace gnisim {

inline constexpr int kBatchCount = 100;

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// k x k table of E[f_i(X) g_j(Y)] over rho-correlated pairs, with
/// batch-means standard errors. Entries are Pr[f = i and g = j] when both
/// functions are vertex-valued.
struct JointTable {
  int k = 0;
  std::uint64_t samples = 0;
  std::vector<double> entries;  // k x k
  std::vector<double> stderrs;  // k x k

  double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * k + j]; }
  double se(int i, int j) const { return stderrs[static_cast<std::size_t>(i) * k + j]; }

  double aggregate_se() const {
    double s = 0.0;
    for (double v : stderrs) s += v * v;
    return std::sqrt(s);
  }
};

/// Computed from index-addressable streams: the same (seed, N, rho, dim)
/// always visits the same sample pairs, so tables sharing a seed share
/// their noise (common random numbers).
inline JointTable estimate_table(const VectorFunction& f, const VectorFunction& g, double rho,
                                 std::uint64_t samples, std::uint64_t seed, unsigned threads = 0) {
  require(f.dim_in() == g.dim_in(), errc::dim_mismatch, "estimate_table: input dims differ");
  require(f.dim_out() == g.dim_out(), errc::dim_mismatch, "estimate_table: output dims differ");
  require(samples >= 100, errc::invalid_samples, "estimate_table: need N >= 100");
  const int n = f.dim_in(), k = f.dim_out();
  const int cells = k * k;
  GaussianPairSampler sampler(rho, n, seed);

  std::vector<std::vector<double>> batch_means(kBatchCount, std::vector<double>(cells, 0.0));
  const std::uint64_t base = samples / kBatchCount;
  const std::uint64_t extra = samples % kBatchCount;
  auto batch_range = [&](int b, std::uint64_t& lo, std::uint64_t& hi) {
    std::uint64_t ub = static_cast<std::uint64_t>(b);
    lo = ub * base + std::min<std::uint64_t>(ub, extra);
    hi = lo + base + (ub < extra ? 1 : 0);
  };

  auto work = [&](int b) {
    std::uint64_t lo, hi;
    batch_range(b, lo, hi);
    std::vector<double> x(n), y(n), fx(k), gy(k);
    std::vector<double>& acc = batch_means[b];
    for (std::uint64_t i = lo; i < hi; ++i) {
      sampler.pair(i, x, y);
      f.eval(x, fx);
      g.eval(y, gy);
      for (int a = 0; a < k; ++a)
        for (int c = 0; c < k; ++c) acc[a * k + c] += fx[a] * gy[c];
    }
    double count = static_cast<double>(hi - lo);
    for (double& v : acc) v /= count;
  };

  unsigned nthreads = std::min<unsigned>(resolve_threads(threads), kBatchCount);
  if (nthreads <= 1) {
    for (int b = 0; b < kBatchCount; ++b) work(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t)
      pool.emplace_back([&, t] {
        for (int b = static_cast<int>(t); b < kBatchCount; b += static_cast<int>(nthreads))
          work(b);
      });
    for (auto& th : pool) th.join();
  }

  JointTable table;
  table.k = k;
  table.samples = samples;
  table.entries.assign(cells, 0.0);
  table.stderrs.assign(cells, 0.0);
  for (int b = 0; b < kBatchCount; ++b)
    for (int c = 0; c < cells; ++c) table.entries[c] += batch_means[b][c];
  for (double& v : table.entries) v /= kBatchCount;
  for (int b = 0; b < kBatchCount; ++b)
    for (int c = 0; c < cells; ++c) {
      double d = batch_means[b][c] - table.entries[c];
      table.stderrs[c] += d * d;
    }
  for (double& v : table.stderrs) v = std::sqrt(v / (kBatchCount - 1.0) / kBatchCount);
  return table;
}

/// Total variation distance between two k x k tables: half the l1 gap.
inline double tv_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), errc::dim_mismatch, "tv_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return 0.5 * s;
}

inline double tv_distance(const JointTable& a, const JointTable& b) {
  require(a.k == b.k, errc::dim_mismatch, "tv_distance: table sizes differ");
  return tv_distance(std::span<const double>(a.entries), std::span<const double>(b.entries));
}

struct TailCheckRow {
  double threshold = 0.0;
  double empirical = 0.0;
  double stderr_rate = 0.0;
  double printed_bound = 0.0;  // d * exp(-t^{2/d})
  bool vacuous = false;        // bound >= 1 says nothing
  bool satisfied = false;      // empirical <= bound + 3 SE
};

/// Empirical deviation rates Pr[|p - E p| >= t * sd] against the printed
/// concentration bound d * e^{-t^{2/d}}. The bound lacks its small-t
/// validity restriction, so rows report both sides and flag the regimes
/// where it is vacuous or simply fails.
inline std::vector<TailCheckRow> tail_check(const ScalarPoly& p, std::span<const double> thresholds,
                                            std::uint64_t samples = 1 << 20,
                                            std::uint64_t seed = 0x7463) {
  ScalarPoly::Moments m = p.moments(std::max<std::uint64_t>(samples, 1 << 16), seed);
  require(m.variance > 0.0, errc::zero_variance, "tail_check: zero variance");
  double sd = std::sqrt(m.variance);
  int d = p.degree();
  std::vector<std::uint64_t> hits(thresholds.size(), 0);
  std::vector<double> x(p.dim_in());
  for (std::uint64_t i = 0; i < samples; ++i) {
    gaussian_vector(seed, 0x7478, i, x);
    double dev = std::fabs(p(x) - m.mean);
    for (std::size_t j = 0; j < thresholds.size(); ++j)
      if (dev >= thresholds[j] * sd) ++hits[j];
  }
  std::vector<TailCheckRow> rows;
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    TailCheckRow row;
    row.threshold = thresholds[j];
    row.empirical = static_cast<double>(hits[j]) / samples;
    row.stderr_rate = std::sqrt(std::max(row.empirical * (1.0 - row.empirical), 1e-12) / samples);
    row.printed_bound = d * std::exp(-std::pow(thresholds[j], 2.0 / d));
    row.vacuous = row.printed_bound >= 1.0;
    row.satisfied = row.empirical <= row.printed_bound + 3.0 * row.stderr_rate;
    rows.push_back(row);
  }
  return rows;
}

struct SignAgreeResult {
  double disagreement = 0.0;
  double stderr_rate = 0.0;
  double tau_multiple = 0.0;  // disagreement / tau
  double variance_ratio = 0.0;
};

/// Empirical Pr[sign(a) != sign(b)] for polynomials whose difference is
/// mean-zero and tiny: Var[a-b] <= (tau/d)^{3d} Var[a] is verified first.
inline SignAgreeResult sign_agree_check(const ScalarPoly& a, const ScalarPoly& b, double tau,
                                        std::uint64_t samples = 1 << 20,
                                        std::uint64_t seed = 0x7361) {
  require(a.dim_in() == b.dim_in(), errc::dim_mismatch, "sign_agree_check: dims differ");
  int d = std::max(a.degree(), b.degree());
  // moments of the difference; exact when both are Hermite-backed
  double var_a, var_diff, mean_diff;
  if (a.has_hermite() && b.has_hermite()) {
    HermiteExpansion diff(a.hermite().dim_in(), 1,
                          std::max(a.hermite().max_degree(), b.hermite().max_degree()));
    for (const auto& [s, c] : a.hermite().coeffs()) diff.set(s, c);
    for (const auto& [s, c] : b.hermite().coeffs()) {
      std::vector<double> cur = diff.coeff(s);
      diff.set(s, {cur[0] - c[0]});
    }
    mean_diff = diff.mean()[0];
    var_diff = diff.variance(0);
    var_a = a.hermite().variance(0);
  } else {
    ScalarPoly::Moments ma = a.moments(samples, seed);
    var_a = ma.variance;
    std::vector<double> x(a.dim_in());
    double s1 = 0.0, s2 = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
      gaussian_vector(seed, 0x7364, i, x);
      double v = a(x) - b(x);
      s1 += v;
      s2 += v * v;
    }
    mean_diff = s1 / samples;
    var_diff = std::max(0.0, s2 / samples - mean_diff * mean_diff);
  }
  require(std::fabs(mean_diff) <= 1e-9 * std::max(1.0, std::sqrt(var_a)),
          errc::precondition_violated, "sign_agree_check: E[a-b] != 0");
  double limit = std::pow(tau / d, 3.0 * d) * var_a;
  require(var_diff <= limit * (1.0 + 1e-9), errc::precondition_violated,
          "sign_agree_check: Var[a-b] exceeds (tau/d)^{3d} Var[a]");

  SignAgreeResult out;
  out.variance_ratio = var_a > 0.0 ? var_diff / var_a : 0.0;
  std::uint64_t bad = 0;
  std::vector<double> x(a.dim_in());
  for (std::uint64_t i = 0; i < samples; ++i) {
    gaussian_vector(seed, 0x7367, i, x);
    if ((a(x) > 0.0) != (b(x) > 0.0)) ++bad;
  }
  out.disagreement = static_cast<double>(bad) / samples;
  out.stderr_rate =
      std::sqrt(std::max(out.disagreement * (1.0 - out.disagreement), 1e-12) / samples);
  out.tau_multiple = out.disagreement / tau;
  return out;
}

}  // namespace gnisim
