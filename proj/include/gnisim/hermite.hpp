#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "gnisim/multi_index.hpp"

namespace gnisim {

/// Normalized probabilists' Hermite polynomial H_q(x), orthonormal under the
/// standard Gaussian. Three-term recurrence:
///   H_0 = 1, H_1 = x, H_{q+1} = (x*H_q - sqrt(q)*H_{q-1}) / sqrt(q+1).
inline double hermite_1d(int q, double x) {
  if (q == 0) return 1.0;
  if (q == 1) return x;
  double hm = 1.0, h = x;
  for (int j = 1; j < q; ++j) {
    double hn = (x * h - std::sqrt(static_cast<double>(j)) * hm) /
                std::sqrt(static_cast<double>(j + 1));
    hm = h;
    h = hn;
  }
  return h;
}

/// H_0..H_d at one point, written into out (size d+1).
inline void hermite_column(int d, double x, double* out) {
  out[0] = 1.0;
  if (d == 0) return;
  out[1] = x;
  for (int j = 1; j < d; ++j)
    out[j + 1] = (x * out[j] - std::sqrt(static_cast<double>(j)) * out[j - 1]) /
                 std::sqrt(static_cast<double>(j + 1));
}

/// Multivariate H_S(x) = prod_i H_{S_i}(x_i).
inline double hermite_multi(const MultiIndex& s, std::span<const double> x) {
  double v = 1.0;
  const auto& e = s.entries();
  for (std::size_t i = 0; i < e.size(); ++i) v *= hermite_1d(e[i], x[i]);
  return v;
}

/// Per-point table of 1-D Hermite values, H[i*(d+1)+q] = H_q(x_i); lets a
/// caller evaluate many multi-indices at one point with plain products.
class HermiteTable {
 public:
  HermiteTable(int n, int d, std::span<const double> x) : n_(n), d_(d), vals_(n * (d + 1)) {
    for (int i = 0; i < n; ++i) hermite_column(d, x[i], vals_.data() + i * (d + 1));
  }

  double value(const MultiIndex& s) const {
    double v = 1.0;
    const auto& e = s.entries();
    for (std::size_t i = 0; i < e.size(); ++i) v *= vals_[i * (d_ + 1) + e[i]];
    return v;
  }

 private:
  int n_, d_;
  std::vector<double> vals_;
};

}  // namespace gnisim
