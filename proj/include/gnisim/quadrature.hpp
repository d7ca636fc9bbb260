#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "gnisim/errors.hpp"
#include "gnisim/linalg.hpp"

namespace gnisim {

/// QUADRATURE is only offered for n <= 6 (tensor node counts stay bounded).
inline constexpr int kMaxQuadratureDim = 6;

struct QuadratureRule1d {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1 (standard Gaussian weight)
};

/// Gauss-Hermite rule for the standard Gaussian weight, by Golub-Welsch on
/// the probabilists' Jacobi matrix (diag 0, off-diag sqrt(i)). Exact for
/// polynomial integrands of degree <= 2*points - 1.
inline QuadratureRule1d gauss_hermite(int points) {
  require(points >= 1, errc::invalid_input, "gauss_hermite: points < 1");
  int m = points;
  std::vector<double> jacobi(m * m, 0.0);
  for (int i = 0; i + 1 < m; ++i) {
    double b = std::sqrt(static_cast<double>(i + 1));
    jacobi[i * m + i + 1] = b;
    jacobi[(i + 1) * m + i] = b;
  }
  std::vector<double> vec;
  std::vector<double> eig = jacobi_eigensymm(std::move(jacobi), m, &vec);
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return eig[a] < eig[b]; });
  QuadratureRule1d rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    rule.nodes[i] = eig[order[i]];
    double first = vec[0 * m + order[i]];
    rule.weights[i] = first * first;
  }
  // Symmetrize: nodes of GH rules are symmetric about 0; averaging the
  // paired values removes eigensolver jitter.
  for (int i = 0, j = m - 1; i < j; ++i, --j) {
    double node = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -node;
    rule.nodes[j] = node;
    double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = rule.weights[j] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

/// Tensorized Gauss-Hermite grid over R^n: points row-major (count x n),
/// weights normalized to sum 1. This is the "fixed discrete measure" the
/// spectral operations integrate against.
struct TensorGrid {
  int dim = 0;
  std::vector<double> points;
  std::vector<double> weights;

  int count() const { return static_cast<int>(weights.size()); }
  std::span<const double> point(int i) const {
    return std::span<const double>(points.data() + static_cast<std::size_t>(i) * dim, dim);
  }
};

inline TensorGrid tensor_gauss_hermite(int n, int points_per_axis) {
  require(n >= 1, errc::invalid_input, "tensor_gauss_hermite: n < 1");
  require(n <= kMaxQuadratureDim, errc::dimension_too_large,
          "tensor quadrature capped at n <= 6");
  QuadratureRule1d rule = gauss_hermite(points_per_axis);
  int m = points_per_axis;
  long long total = 1;
  for (int i = 0; i < n; ++i) total *= m;
  TensorGrid grid;
  grid.dim = n;
  grid.points.resize(static_cast<std::size_t>(total) * n);
  grid.weights.resize(total);
  std::vector<int> idx(n, 0);
  for (long long p = 0; p < total; ++p) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      grid.points[p * n + i] = rule.nodes[idx[i]];
      w *= rule.weights[idx[i]];
    }
    grid.weights[p] = w;
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
  }
  return grid;
}

}  // namespace gnisim
