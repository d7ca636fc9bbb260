#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gnisim/errors.hpp"
#include "gnisim/normal.hpp"
#include "gnisim/rng.hpp"
#include "gnisim/sampling.hpp"
#include "gnisim/simplex.hpp"
#include "gnisim/vector_function.hpp"

namespace gnisim {

struct RoundReport {
  VectorFunction rounded;
  double measured_l1_drift = 0.0;   // estimate of E||f - Proj(f)||_1
  double drift_stderr = 0.0;
  double exceedance = 0.0;          // measured Pr[f outside Delta_{k,delta}]
};

/// Proj o f, with the sampled precondition check Pr[f not in Delta_{k,delta}]
/// <= delta and ||f||_inf <= k. The l1 drift E||f - f_1||_1 (the O(k*delta)
/// quantity) is measured and reported.
inline RoundReport round_to_simplex(const VectorFunction& f, double delta,
                                    std::uint64_t check_samples = 20000,
                                    std::uint64_t seed = 0x726e64) {
  const int n = f.dim_in(), k = f.dim_out();
  std::vector<double> x(n), y(k), p(k);
  std::uint64_t outside = 0;
  double drift = 0.0, drift_sq = 0.0;
  for (std::uint64_t i = 0; i < check_samples; ++i) {
    gaussian_vector(seed, 0x724e, i, x);
    f.eval(x, y);
    for (int j = 0; j < k; ++j)
      require(std::fabs(y[j]) <= static_cast<double>(k) + 1e-12, errc::precondition_violated,
              "round_to_simplex: ||f||_inf exceeds k");
    if (l1_dist_to_simplex(y) > delta) ++outside;
    proj_simplex(y, p);
    double d1 = 0.0;
    for (int j = 0; j < k; ++j) d1 += std::fabs(y[j] - p[j]);
    drift += d1;
    drift_sq += d1 * d1;
  }
  double nn = static_cast<double>(check_samples);
  double exceed = static_cast<double>(outside) / nn;
  // 3-sigma slack on the sampled precondition
  double slack = 3.0 * std::sqrt(std::max(exceed * (1.0 - exceed), 1e-12) / nn);
  require(exceed <= delta + slack, errc::precondition_violated,
          "round_to_simplex: Pr[f outside Delta_{k,delta}] measured " + std::to_string(exceed));

  RoundReport rep{VectorFunction::black_box(
                      n, k,
                      [f, k](std::span<const double> xx, std::span<double> out) {
                        std::vector<double> raw(k);
                        f.eval(xx, raw);
                        proj_simplex(raw, out);
                      }),
                  0.0, 0.0, exceed};
  rep.measured_l1_drift = drift / nn;
  rep.drift_stderr = std::sqrt(std::max(0.0, drift_sq / nn - rep.measured_l1_drift * rep.measured_l1_drift) / nn);
  return rep;
}

/// Index of the interval of R (under the Gaussian measure) that z falls in,
/// where the partition has masses y_1, ..., y_k in order.
inline int partition_index(std::span<const double> y, double z) {
  double u = normal_cdf(z);
  double cum = 0.0;
  int k = static_cast<int>(y.size());
  for (int i = 0; i < k; ++i) {
    cum += y[i];
    if (u <= cum) return i;
  }
  return k - 1;
}

struct PartRoundPair {
  VectorFunction f2;
  VectorFunction g2;
};

/// Lift simplex-valued (f1, g1) on R^n to [k]-valued (f2, g2) on R^{n+2}:
/// f2(x, z1, z2) picks the Gaussian interval of z1 under the partition with
/// masses f1(x); g2 uses z2. Means and the whole correlation table are
/// preserved in distribution. The two fresh coordinates are distinct so that
/// Alice's auxiliary draw stays independent of Bob's.
inline PartRoundPair part_round(const VectorFunction& f1, const VectorFunction& g1,
                                std::uint64_t check_samples = 4096,
                                std::uint64_t seed = 0x707274) {
  require(f1.dim_out() == g1.dim_out(), errc::dim_mismatch, "part_round: k mismatch");
  require(f1.dim_in() == g1.dim_in(), errc::dim_mismatch, "part_round: n mismatch");
  const int n = f1.dim_in(), k = f1.dim_out();
  std::vector<double> x(n), y(k);
  for (std::uint64_t i = 0; i < check_samples; ++i) {
    gaussian_vector(seed, 0x7072, i, x);
    for (const VectorFunction* fn : {&f1, &g1}) {
      fn->eval(x, y);
      require(l1_dist_to_simplex(y) <= 1e-9, errc::not_simplex_valued,
              "part_round: input is not simplex-valued");
    }
  }
  auto lift = [n, k](const VectorFunction& base, int aux_coord) {
    return vertex_function(n + 2, k, [base, n, aux_coord](std::span<const double> xz) {
      std::vector<double> masses(base.dim_out());
      base.eval(xz.subspan(0, n), masses);
      return partition_index(masses, xz[n + aux_coord]);
    });
  };
  return PartRoundPair{lift(f1, 0), lift(g1, 1)};
}

/// The inclusive threshold grid {0, eta, 2eta, ...} cap [0,1].
inline std::vector<double> int_eta_grid(double eta) {
  require(eta > 0.0 && eta <= 1.0, errc::invalid_input, "eta outside (0,1]");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    double v = i * eta;
    if (v > 1.0 + 1e-15) break;
    grid.push_back(std::min(v, 1.0));
  }
  return grid;
}

struct GridRoundMode {
  enum class Kind { kExpected, kSampled };
  Kind kind = Kind::kExpected;
  std::uint64_t seed = 0;

  static GridRoundMode expected() { return {}; }
  static GridRoundMode sampled(std::uint64_t seed) { return {Kind::kSampled, seed}; }
};

/// Randomized grid rounding of y toward vertices: coordinate s survives a
/// threshold alpha_s drawn from Int_eta when y_s > alpha_s. EXPECTED returns
/// the exact average over the grid; SAMPLED draws one threshold vector.
/// The expected output is within 2(zeta + k*eta) of y in l1 for
/// y in Delta_{k,zeta}.
inline std::vector<double> grid_round(std::span<const double> y, double eta,
                                      const GridRoundMode& mode = GridRoundMode::expected()) {
  const int k = static_cast<int>(y.size());
  std::vector<double> grid = int_eta_grid(eta);
  std::vector<double> out(k, 0.0);
  if (mode.kind == GridRoundMode::Kind::kExpected) {
    for (int s = 0; s < k; ++s) {
      int count = 0;
      for (double a : grid)
        if (y[s] - a > 0.0) ++count;
      out[s] = static_cast<double>(count) / static_cast<double>(grid.size());
    }
    return out;
  }
  CounterRng rng(mode.seed, 0x677264);
  for (int s = 0; s < k; ++s) {
    double a = grid[static_cast<std::size_t>(rng.next_uniform() * grid.size()) % grid.size()];
    out[s] = y[s] - a > 0.0 ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace gnisim
