#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gnisim/errors.hpp"

namespace gnisim {

/// Bernstein basis weights p_{k,d}(x) = C(d,k) x^k (1-x)^{d-k} for k = 0..d:
/// the Binomial(d, x) pmf. Log-space evaluation keeps large d stable.
inline std::vector<double> bernstein_weights(int d, double x) {
  require(x >= 0.0 && x <= 1.0, errc::invalid_input, "OUT_OF_BOX: x outside [0,1]");
  std::vector<double> w(d + 1, 0.0);
  if (d == 0 || x == 0.0) {
    w[0] = 1.0;
    return w;
  }
  if (x == 1.0) {
    w[d] = 1.0;
    return w;
  }
  double lx = std::log(x), l1x = std::log1p(-x);
  double lgd = std::lgamma(d + 1.0);
  double sum = 0.0;
  for (int k = 0; k <= d; ++k) {
    double lv = lgd - std::lgamma(k + 1.0) - std::lgamma(d - k + 1.0) + k * lx + (d - k) * l1x;
    w[k] = lv < -745.0 ? 0.0 : std::exp(lv);
    sum += w[k];
  }
  for (double& v : w) v /= sum;
  return w;
}

/// Signed Bernstein basis values for arbitrary real u (the true polynomial,
/// also valid outside [0,1]). Intended for small d; magnitudes explode with
/// d by nature of the basis.
inline std::vector<double> bernstein_basis_signed(int d, double u) {
  std::vector<double> w(d + 1);
  // binomial row by Pascal recurrence
  std::vector<double> choose(d + 1);
  choose[0] = 1.0;
  for (int k = 1; k <= d; ++k) choose[k] = choose[k - 1] * (d - k + 1.0) / k;
  for (int k = 0; k <= d; ++k)
    w[k] = choose[k] * std::pow(u, k) * std::pow(1.0 - u, d - k);
  return w;
}

/// Width of the retained pmf window in binomial standard deviations; the
/// discarded tail mass is below 1e-9.
inline constexpr double kWindowSigmas = 6.0;

/// Basis weights restricted to the window carrying the pmf mass; for small d
/// the window is the whole row. Buffer-reusing form for hot loops.
inline void bernstein_window_into(int d, double x, int& lo, std::vector<double>& w,
                                  double halfwidth_sigmas = kWindowSigmas) {
  if (d <= 64 || x == 0.0 || x == 1.0) {
    lo = 0;
    w = bernstein_weights(d, x);
    return;
  }
  double mean = d * x;
  double sigma = std::sqrt(d * x * (1.0 - x));
  lo = std::max(0, static_cast<int>(std::floor(mean - halfwidth_sigmas * sigma - 4.0)));
  int hi = std::min(d, static_cast<int>(std::ceil(mean + halfwidth_sigmas * sigma + 4.0)));
  w.assign(hi - lo + 1, 0.0);
  // pmf recurrence p_{k+1}/p_k = x/(1-x) * (d-k)/(k+1), anchored at the mode
  int mode = std::clamp(static_cast<int>((d + 1) * x), lo, hi);
  w[mode - lo] = 1.0;
  double ratio = x / (1.0 - x);
  for (int k = mode; k < hi; ++k)
    w[k + 1 - lo] = w[k - lo] * ratio * (static_cast<double>(d - k) / (k + 1));
  for (int k = mode; k > lo; --k)
    w[k - 1 - lo] = w[k - lo] * (static_cast<double>(k) / (d - k + 1)) / ratio;
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
}

struct BernsteinWindow {
  int lo = 0;
  std::vector<double> weights;
};

inline BernsteinWindow bernstein_window(int d, double x,
                                        double halfwidth_sigmas = kWindowSigmas) {
  BernsteinWindow out;
  bernstein_window_into(d, x, out.lo, out.weights, halfwidth_sigmas);
  return out;
}

/// Euclidean ball domain, mapped affinely onto the unit box for fitting.
struct BallDomain {
  std::vector<double> center;
  double radius = 0.0;
};

/// Tensor-product Bernstein approximant of a scalar function; values stored
/// at the grid (k_1/d_1, ..., k_l/d_l) row-major.
class BernsteinApprox {
 public:
  BernsteinApprox(std::vector<int> degrees, std::vector<double> values)
      : degrees_(std::move(degrees)), values_(std::move(values)) {
    std::size_t expect = 1;
    for (int d : degrees_) {
      require(d >= 1, errc::invalid_input, "bernstein degree < 1");
      expect *= static_cast<std::size_t>(d + 1);
    }
    require(values_.size() == expect, errc::dim_mismatch, "value tensor shape mismatch");
    strides_.assign(degrees_.size(), 1);
    for (int j = static_cast<int>(degrees_.size()) - 2; j >= 0; --j)
      strides_[j] = strides_[j + 1] * static_cast<std::size_t>(degrees_[j + 1] + 1);
  }

  const std::vector<int>& degrees() const { return degrees_; }
  const std::vector<double>& values() const { return values_; }
  int dim() const { return static_cast<int>(degrees_.size()); }
  const std::optional<BallDomain>& ball() const { return ball_; }
  void set_ball(BallDomain b) { ball_ = std::move(b); }

  /// Evaluate at u. Inside the box this is the pmf contraction; outside, the
  /// signed basis is used when every degree permits it (d <= 64), otherwise
  /// the chart saturates at the box boundary (the approximant is only
  /// meaningful on its fitted domain; saturation keeps large-degree
  /// composites finite where the polynomial itself would overflow).
  double eval_box(std::span<const double> u) const {
    int l = dim();
    bool inside = true;
    for (int j = 0; j < l; ++j) inside = inside && u[j] >= 0.0 && u[j] <= 1.0;
    int max_degree = *std::max_element(degrees_.begin(), degrees_.end());

    thread_local std::vector<std::vector<double>> bufs;
    thread_local std::vector<int> los;
    if (bufs.size() < static_cast<std::size_t>(l)) bufs.resize(l);
    los.assign(l, 0);
    for (int j = 0; j < l; ++j) {
      if (inside || max_degree > 64) {
        bernstein_window_into(degrees_[j], std::clamp(u[j], 0.0, 1.0), los[j], bufs[j]);
      } else {
        los[j] = 0;
        bufs[j] = bernstein_basis_signed(degrees_[j], u[j]);
      }
    }
    if (l == 1) {
      const double* row = values_.data() + los[0];
      double s = 0.0;
      for (std::size_t t = 0; t < bufs[0].size(); ++t) s += bufs[0][t] * row[t];
      return s;
    }
    if (l == 2) {
      const std::size_t stride = strides_[0];
      double acc = 0.0;
      for (std::size_t r = 0; r < bufs[0].size(); ++r) {
        const double* row = values_.data() + (los[0] + r) * stride + los[1];
        const double* w1 = bufs[1].data();
        double s = 0.0;
        for (std::size_t t = 0; t < bufs[1].size(); ++t) s += w1[t] * row[t];
        acc += bufs[0][r] * s;
      }
      return acc;
    }
    return contract(bufs, los, 0, 0);
  }

  /// Evaluate in ambient coordinates through the ball's affine chart.
  double eval(std::span<const double> z) const {
    if (!ball_) return eval_box(z);
    int l = dim();
    thread_local std::vector<double> u;
    u.resize(l);
    for (int j = 0; j < l; ++j)
      u[j] = (z[j] - ball_->center[j]) / (2.0 * ball_->radius) + 0.5;
    return eval_box(u);
  }

 private:
  double contract(const std::vector<std::vector<double>>& wins, const std::vector<int>& los,
                  int axis, std::size_t offset) const {
    const std::vector<double>& w = wins[axis];
    if (axis == dim() - 1) {
      const double* row = values_.data() + offset + los[axis];
      double s = 0.0;
      for (std::size_t t = 0; t < w.size(); ++t) s += w[t] * row[t];
      return s;
    }
    double s = 0.0;
    for (std::size_t t = 0; t < w.size(); ++t)
      s += w[t] * contract(wins, los, axis + 1, offset + (los[axis] + t) * strides_[axis]);
    return s;
  }

  std::vector<int> degrees_;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;
  std::optional<BallDomain> ball_;
};

/// Fit on the unit box by sampling f at the Bernstein grid.
inline BernsteinApprox bp_fit(const std::function<double(std::span<const double>)>& f,
                              std::vector<int> degrees) {
  int l = static_cast<int>(degrees.size());
  std::size_t total = 1;
  for (int d : degrees) total *= static_cast<std::size_t>(d + 1);
  std::vector<double> values(total);
  std::vector<int> idx(l, 0);
  std::vector<double> u(l);
  for (std::size_t p = 0; p < total; ++p) {
    for (int j = 0; j < l; ++j) u[j] = static_cast<double>(idx[j]) / degrees[j];
    values[p] = f(u);
    for (int j = l - 1; j >= 0; --j) {
      if (++idx[j] <= degrees[j]) break;
      idx[j] = 0;
    }
  }
  return BernsteinApprox(std::move(degrees), std::move(values));
}

inline double bp_eval(const BernsteinApprox& a, std::span<const double> x) { return a.eval(x); }

/// Euclidean projection onto B(center, r).
inline void proj_ball(std::span<const double> z, std::span<const double> center, double r,
                      std::span<double> out) {
  double d2 = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    double t = z[j] - center[j];
    d2 += t * t;
  }
  double d = std::sqrt(d2);
  if (d <= r) {
    std::copy(z.begin(), z.end(), out.begin());
    return;
  }
  double scale = r / d;
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = center[j] + scale * (z[j] - center[j]);
}

/// Per-variable degree from the ball rescaling: l * 4 r^2 / eta^2.
inline long long ball_degree(double eta, double r, int l) {
  return static_cast<long long>(std::ceil(l * 4.0 * r * r / (eta * eta)));
}

/// Approximant of a 1-Lipschitz f on B(center, r) with sup-error <= eta on
/// the ball; f is extended to the bounding box through the ball projection.
inline BernsteinApprox bp_on_ball(const std::function<double(std::span<const double>)>& f,
                                  std::vector<double> center, double r, double eta,
                                  long long degree_override = 0) {
  require(eta > 0.0, errc::invalid_input, "bp_on_ball: eta <= 0");
  require(r > 0.0, errc::invalid_input, "bp_on_ball: r <= 0");
  int l = static_cast<int>(center.size());
  long long deg = degree_override > 0 ? degree_override : ball_degree(eta, r, l);
  std::vector<int> degrees(l, static_cast<int>(deg));
  auto boxed = [&, l](std::span<const double> u) {
    std::vector<double> z(l), p(l);
    for (int j = 0; j < l; ++j) z[j] = center[j] + (u[j] - 0.5) * 2.0 * r;
    proj_ball(z, center, r, p);
    return f(p);
  };
  BernsteinApprox a = bp_fit(boxed, std::move(degrees));
  a.set_ball(BallDomain{std::move(center), r});
  return a;
}

/// Fit several scalar outputs on a shared ball grid in one pass (the grid
/// values come from one callback returning all outputs).
inline std::vector<BernsteinApprox> bp_on_ball_multi(
    const std::function<void(std::span<const double>, std::span<double>)>& f, int outputs,
    std::vector<double> center, double r, long long degree) {
  int l = static_cast<int>(center.size());
  std::vector<int> degrees(l, static_cast<int>(degree));
  std::size_t total = 1;
  for (int d : degrees) total *= static_cast<std::size_t>(d + 1);
  std::vector<std::vector<double>> values(outputs, std::vector<double>(total));
  std::vector<int> idx(l, 0);
  std::vector<double> u(l), z(l), p(l), out(outputs);
  for (std::size_t q = 0; q < total; ++q) {
    for (int j = 0; j < l; ++j) {
      u[j] = static_cast<double>(idx[j]) / degrees[j];
      z[j] = center[j] + (u[j] - 0.5) * 2.0 * r;
    }
    proj_ball(z, center, r, p);
    f(p, out);
    for (int s = 0; s < outputs; ++s) values[s][q] = out[s];
    for (int j = l - 1; j >= 0; --j) {
      if (++idx[j] <= degrees[j]) break;
      idx[j] = 0;
    }
  }
  std::vector<BernsteinApprox> result;
  result.reserve(outputs);
  for (int s = 0; s < outputs; ++s) {
    BernsteinApprox a(degrees, std::move(values[s]));
    a.set_ball(BallDomain{center, r});
    result.push_back(std::move(a));
  }
  return result;
}

}  // namespace gnisim
