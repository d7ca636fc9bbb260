#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace gnisim {

/// Cyclic Jacobi eigensolver for a small dense symmetric matrix (row-major
/// n*n). Returns eigenvalues; if vectors != nullptr it receives the
/// orthonormal eigenvectors as columns (row-major n*n). Plenty for the
/// Golub-Welsch quadrature matrices and k x k correlation Gram matrices.
inline std::vector<double> jacobi_eigensymm(std::vector<double> a, int n,
                                            std::vector<double>* vectors = nullptr) {
  std::vector<double> v(n * n, 0.0);
  for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (std::fabs(apq) < 1e-300) continue;
        double app = a[p * n + p], aqq = a[q * n + q];
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int i = 0; i < n; ++i) {
          double aip = a[i * n + p], aiq = a[i * n + q];
          a[i * n + p] = c * aip - s * aiq;
          a[i * n + q] = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          double api = a[p * n + i], aqi = a[q * n + i];
          a[p * n + i] = c * api - s * aqi;
          a[q * n + i] = s * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          double vip = v[i * n + p], viq = v[i * n + q];
          v[i * n + p] = c * vip - s * viq;
          v[i * n + q] = s * vip + c * viq;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a[i * n + i];
  if (vectors) *vectors = std::move(v);
  return eig;
}

/// Singular values of a general m x n matrix (row-major), descending, via the
/// eigenvalues of the smaller Gram matrix.
inline std::vector<double> singular_values(const std::vector<double>& m_rows, int m, int n) {
  bool tall = m >= n;
  int r = tall ? n : m;
  std::vector<double> gram(r * r, 0.0);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      double s = 0.0;
      if (tall) {
        for (int t = 0; t < m; ++t) s += m_rows[t * n + i] * m_rows[t * n + j];
      } else {
        for (int t = 0; t < n; ++t) s += m_rows[i * n + t] * m_rows[j * n + t];
      }
      gram[i * r + j] = s;
    }
  }
  std::vector<double> eig = jacobi_eigensymm(std::move(gram), r);
  std::vector<double> sv(r);
  for (int i = 0; i < r; ++i) sv[i] = std::sqrt(std::max(0.0, eig[i]));
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

}  // namespace gnisim
