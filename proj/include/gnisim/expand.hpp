#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <vector>

#include "gnisim/errors.hpp"
#include "gnisim/estimator.hpp"
#include "gnisim/expansion.hpp"
#include "gnisim/rng.hpp"
#include "gnisim/vector_function.hpp"

namespace gnisim {

struct ExpandMethod {
  enum class Kind { kQuadrature, kMonteCarlo };
  Kind kind = Kind::kQuadrature;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  int points_per_axis = 0;  // 0: the 2d+4 default (exact for polynomial integrands)

  static ExpandMethod quadrature(int points_per_axis = 0) {
    ExpandMethod m;
    m.points_per_axis = points_per_axis;
    return m;
  }
  static ExpandMethod monte_carlo(std::uint64_t n, std::uint64_t seed) {
    ExpandMethod m;
    m.kind = Kind::kMonteCarlo;
    m.samples = n;
    m.seed = seed;
    return m;
  }
};

/// Hermite coefficients f^(S) = E[f(X) H_S(X)] for all |S| <= d, by tensor
/// Gauss-Hermite (2d+4 nodes per axis, n <= 6) or Monte Carlo with
/// per-coefficient standard errors.
inline HermiteExpansion expand(const VectorFunction& f, int d, const ExpandMethod& method) {
  const int n = f.dim_in(), k = f.dim_out();
  std::vector<MultiIndex> indices = multi_indices_up_to(n, d);
  HermiteExpansion out(n, k, d);

  if (method.kind == ExpandMethod::Kind::kQuadrature) {
    require(n <= kMaxQuadratureDim, errc::dimension_too_large,
            "expand: QUADRATURE limited to n <= 6");
    int points = method.points_per_axis > 0 ? method.points_per_axis : 2 * d + 4;
    DiscreteMeasure mu = quadrature_measure(n, points);
    std::vector<std::vector<double>> acc(indices.size(), std::vector<double>(k, 0.0));
    std::vector<double> fx(k);
    for (int p = 0; p < mu.count(); ++p) {
      auto x = mu.point(p);
      f.eval(x, fx);
      HermiteTable table(n, d, x);
      for (std::size_t s = 0; s < indices.size(); ++s) {
        double h = table.value(indices[s]) * mu.weights[p];
        for (int j = 0; j < k; ++j) acc[s][j] += h * fx[j];
      }
    }
    for (std::size_t s = 0; s < indices.size(); ++s) out.set(indices[s], std::move(acc[s]));
    return out;
  }

  require(method.samples >= 2, errc::invalid_samples, "expand: MONTE_CARLO needs N >= 2");
  const std::uint64_t N = method.samples;
  std::vector<std::vector<double>> sum(indices.size(), std::vector<double>(k, 0.0));
  std::vector<std::vector<double>> sumsq(indices.size(), std::vector<double>(k, 0.0));
  std::vector<double> x(n), fx(k);
  for (std::uint64_t i = 0; i < N; ++i) {
    gaussian_vector(method.seed, 0x657870, i, x);
    f.eval(x, fx);
    HermiteTable table(n, d, x);
    for (std::size_t s = 0; s < indices.size(); ++s) {
      double h = table.value(indices[s]);
      for (int j = 0; j < k; ++j) {
        double v = h * fx[j];
        sum[s][j] += v;
        sumsq[s][j] += v * v;
      }
    }
  }
  HermiteExpansion::CoeffMap se;
  double dn = static_cast<double>(N);
  for (std::size_t s = 0; s < indices.size(); ++s) {
    std::vector<double> mean(k), err(k);
    for (int j = 0; j < k; ++j) {
      mean[j] = sum[s][j] / dn;
      double var = std::max(0.0, sumsq[s][j] / dn - mean[j] * mean[j]);
      err[j] = std::sqrt(var / dn);
    }
    se[indices[s]] = std::move(err);
    out.set(indices[s], std::move(mean));
  }
  out.set_stderrs(std::move(se));
  return out;
}

/// Noise operator on a black-box function: a deterministic evaluator that
/// averages f(e^{-t} x + sqrt(1-e^{-2t}) y) over a pinned inner stream.
/// The inner stream is keyed by the bits of x, so the result is a genuine
/// function of x.
inline VectorFunction noise_apply(const VectorFunction& f, double t, std::uint64_t inner_samples,
                                  std::uint64_t seed) {
  require(t >= 0.0, errc::negative_time, "noise_apply: t < 0");
  const int n = f.dim_in(), k = f.dim_out();
  const double decay = std::exp(-t);
  const double spread = std::sqrt(std::max(0.0, 1.0 - decay * decay));
  return VectorFunction::black_box(
      n, k,
      [f, n, k, decay, spread, inner_samples, seed](std::span<const double> x,
                                                    std::span<double> out) {
        std::uint64_t key = seed;
        for (double v : x) {
          std::uint64_t bits;
          static_assert(sizeof(bits) == sizeof(v));
          std::memcpy(&bits, &v, sizeof(bits));
          key = detail::mix64(key ^ bits);
        }
        std::vector<double> y(n), z(n), fy(k);
        for (double& v : out) v = 0.0;
        CounterRng rng(key, 0x6e6f6973);
        for (std::uint64_t i = 0; i < inner_samples; ++i) {
          for (int j = 0; j < n; ++j) y[j] = rng.next_normal();
          for (int j = 0; j < n; ++j) z[j] = decay * x[j] + spread * y[j];
          f.eval(z, fy);
          for (int j = 0; j < k; ++j) out[j] += fy[j];
        }
        for (int j = 0; j < k; ++j) out[j] /= static_cast<double>(inner_samples);
      });
}

}  // namespace gnisim
