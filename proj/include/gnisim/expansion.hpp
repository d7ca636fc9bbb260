#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gnisim/errors.hpp"
#include "gnisim/hermite.hpp"
#include "gnisim/multi_index.hpp"

namespace gnisim {

/// Drop threshold for sparse storage of Hermite coefficients.
inline constexpr double kCoeffDropTol = 1e-12;

/// Sparse Hermite expansion of a map R^n -> R^k: multi-index -> coefficient
/// vector. Immutable by convention after assembly (operations return copies).
class HermiteExpansion {
 public:
  using CoeffMap = std::map<MultiIndex, std::vector<double>>;

  /// Empty zero-dimensional expansion; assign a real one before use.
  HermiteExpansion() : n_(0), k_(0), max_degree_(0) {}

  HermiteExpansion(int dim_in, int dim_out, int max_degree)
      : n_(dim_in), k_(dim_out), max_degree_(max_degree) {}

  int dim_in() const { return n_; }
  int dim_out() const { return k_; }
  int max_degree() const { return max_degree_; }
  const CoeffMap& coeffs() const { return coeffs_; }

  void set(const MultiIndex& s, std::vector<double> v) {
    require(static_cast<int>(v.size()) == k_, errc::dim_mismatch, "coefficient size != k");
    require(s.order() <= max_degree_, errc::degree_exceeded, "|S| exceeds max_degree");
    require(s.size() <= n_, errc::dim_mismatch, "multi-index longer than dim_in");
    double norm = 0.0;
    for (double c : v) norm += c * c;
    if (std::sqrt(norm) < kCoeffDropTol) {
      coeffs_.erase(s);
      return;
    }
    coeffs_[s] = std::move(v);
  }

  std::vector<double> coeff(const MultiIndex& s) const {
    auto it = coeffs_.find(s);
    if (it == coeffs_.end()) return std::vector<double>(k_, 0.0);
    return it->second;
  }

  /// E[f] = coefficient of the constant basis function.
  std::vector<double> mean() const { return coeff(MultiIndex{}); }

  /// Var of coordinate j: sum of squared non-constant coefficients.
  double variance(int j) const {
    double v = 0.0;
    for (const auto& [s, c] : coeffs_)
      if (!s.is_zero()) v += c[j] * c[j];
    return v;
  }

  /// Parseval mass: sum of all squared coefficient norms.
  double squared_norm() const {
    double v = 0.0;
    for (const auto& [s, c] : coeffs_)
      for (double x : c) v += x * x;
    return v;
  }

  void eval(std::span<const double> x, std::span<double> out) const {
    thread_local std::vector<double> cols;
    const int width = max_degree_ + 1;
    cols.resize(static_cast<std::size_t>(n_) * width);
    for (int i = 0; i < n_; ++i) hermite_column(max_degree_, x[i], cols.data() + i * width);
    for (int j = 0; j < k_; ++j) out[j] = 0.0;
    for (const auto& [s, c] : coeffs_) {
      double h = 1.0;
      const auto& e = s.entries();
      for (std::size_t i = 0; i < e.size(); ++i) h *= cols[i * width + e[i]];
      for (int j = 0; j < k_; ++j) out[j] += c[j] * h;
    }
  }

  std::vector<double> eval(std::span<const double> x) const {
    std::vector<double> out(k_);
    eval(x, out);
    return out;
  }

  /// Standard errors per coefficient (present for Monte-Carlo fits).
  const std::optional<CoeffMap>& stderrs() const { return stderr_; }
  void set_stderrs(CoeffMap se) { stderr_ = std::move(se); }

 private:
  int n_, k_, max_degree_;
  CoeffMap coeffs_;
  std::optional<CoeffMap> stderr_;
};

struct SpectralWeight {
  double low = 0.0;                  // W^{<=d}
  std::optional<double> high;        // E||f||^2 - low, when the total mass is known
};

/// W^{<=d}[f] and, when E||f||^2 is supplied, the Parseval residual W^{>d}.
inline SpectralWeight spectral_weight(const HermiteExpansion& e, int d,
                                      std::optional<double> total_second_moment = std::nullopt) {
  require(d <= e.max_degree(), errc::degree_exceeded, "spectral_weight: d > max_degree");
  SpectralWeight w;
  for (const auto& [s, c] : e.coeffs()) {
    if (s.order() > d) continue;
    for (double x : c) w.low += x * x;
  }
  if (total_second_moment) w.high = *total_second_moment - w.low;
  return w;
}

/// Ornstein-Uhlenbeck action on coefficients: multiply f^(S) by e^{-t|S|}.
inline HermiteExpansion noise_apply(const HermiteExpansion& e, double t) {
  require(t >= 0.0, errc::negative_time, "noise_apply: t < 0");
  HermiteExpansion out(e.dim_in(), e.dim_out(), e.max_degree());
  for (const auto& [s, c] : e.coeffs()) {
    double factor = std::exp(-t * s.order());
    std::vector<double> v(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) v[j] = c[j] * factor;
    out.set(s, std::move(v));
  }
  return out;
}

}  // namespace gnisim
