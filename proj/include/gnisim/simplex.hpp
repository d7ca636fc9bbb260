#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "gnisim/errors.hpp"

namespace gnisim {

/// Euclidean projection onto the probability simplex, sort-and-threshold,
/// O(k log k). The active set's threshold is uniquely determined, matching
/// the uniqueness/contractivity of the metric projection.
inline void proj_simplex(std::span<const double> x, std::span<double> out) {
  const int k = static_cast<int>(x.size());
  double sum = 0.0, low = 0.0;
  for (double v : x) {
    require(std::isfinite(v), errc::non_finite_input, "proj_simplex: non-finite coordinate");
    sum += v;
    low = std::min(low, v);
  }
  // points within float noise of the simplex are returned unchanged, which
  // makes the projection exactly idempotent
  if (low >= 0.0 && std::fabs(sum - 1.0) <= 64.0 * std::numeric_limits<double>::epsilon()) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  std::vector<double> u(x.begin(), x.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double running = 0.0;
  double theta = 0.0;
  for (int i = 0; i < k; ++i) {
    running += u[i];
    double candidate = (running - 1.0) / (i + 1);
    if (u[i] - candidate > 0.0) theta = candidate;
  }
  for (int i = 0; i < k; ++i) out[i] = std::max(0.0, x[i] - theta);
}

inline std::vector<double> proj_simplex(std::span<const double> x) {
  std::vector<double> out(x.size());
  proj_simplex(x, out);
  return out;
}

/// arg max as a vector map: e_i when coordinate i is the unique strict
/// maximum, the zero vector on any tie. Comparisons are exact; ties are a
/// documented sharp edge (measure zero for the polynomials in play).
inline void argmax_vec(std::span<const double> z, std::span<double> out) {
  const int k = static_cast<int>(z.size());
  int best = 0;
  bool unique = true;
  for (int i = 1; i < k; ++i) {
    if (z[i] > z[best]) {
      best = i;
      unique = true;
    } else if (z[i] == z[best]) {
      unique = false;
    }
  }
  for (int i = 0; i < k; ++i) out[i] = 0.0;
  if (unique) out[best] = 1.0;
}

inline std::vector<double> argmax_vec(std::span<const double> z) {
  std::vector<double> out(z.size());
  argmax_vec(z, out);
  return out;
}

/// l1 distance from y to the simplex. Optimal transport splits into: zero
/// out negative coordinates, then fix the total mass of the positive part.
inline double l1_dist_to_simplex(std::span<const double> y) {
  double neg = 0.0, pos = 0.0;
  for (double v : y) {
    if (v < 0.0)
      neg -= v;
    else
      pos += v;
  }
  return neg + std::fabs(pos - 1.0);
}

inline bool in_simplex_neighborhood(std::span<const double> y, double eps) {
  return l1_dist_to_simplex(y) <= eps;
}

/// A point of the simplex; construction validates the invariants.
struct SimplexPoint {
  std::vector<double> coords;

  explicit SimplexPoint(std::vector<double> c) : coords(std::move(c)) {
    double sum = 0.0;
    for (double v : coords) {
      require(v >= 0.0, errc::invalid_input, "SimplexPoint: negative coordinate");
      sum += v;
    }
    require(std::fabs(sum - 1.0) <= 1e-12, errc::invalid_input, "SimplexPoint: mass != 1");
  }
};

}  // namespace gnisim
