#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gnisim/errors.hpp"
#include "gnisim/quadrature.hpp"
#include "gnisim/sampling.hpp"

namespace gnisim {

/// A fixed positive-weight discrete stand-in for the Gaussian measure.
/// Every expectation inside an iterative run is taken against one such
/// measure, so identities that hold pointwise (projection facts,
/// orthogonality of a quadrature-exact basis) hold for the estimates too.
struct DiscreteMeasure {
  int dim = 0;
  std::vector<double> points;   // count x dim, row-major
  std::vector<double> weights;  // positive, sum 1
  bool is_quadrature = false;

  int count() const { return static_cast<int>(weights.size()); }
  std::span<const double> point(int i) const {
    return std::span<const double>(points.data() + static_cast<std::size_t>(i) * dim, dim);
  }
};

inline DiscreteMeasure quadrature_measure(int n, int points_per_axis) {
  TensorGrid grid = tensor_gauss_hermite(n, points_per_axis);
  DiscreteMeasure m;
  m.dim = n;
  m.points = std::move(grid.points);
  m.weights = std::move(grid.weights);
  m.is_quadrature = true;
  return m;
}

inline DiscreteMeasure monte_carlo_measure(int n, std::uint64_t samples, std::uint64_t seed) {
  require(samples >= 2, errc::invalid_samples, "monte_carlo_measure: need >= 2 samples");
  DiscreteMeasure m;
  m.dim = n;
  m.points.resize(samples * n);
  m.weights.assign(samples, 1.0 / static_cast<double>(samples));
  for (std::uint64_t i = 0; i < samples; ++i)
    gaussian_vector(seed, 0x6d6561, i,
                    std::span<double>(m.points.data() + i * n, n));
  return m;
}

}  // namespace gnisim
