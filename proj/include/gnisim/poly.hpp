#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "gnisim/bernstein.hpp"
#include "gnisim/expansion.hpp"
#include "gnisim/rng.hpp"
#include "gnisim/sampling.hpp"

namespace gnisim {

/// A scalar polynomial p(x) = scale * B_s(q_1(x), ..., q_k(x)) + shift:
/// one output coordinate of a Bernstein outer map composed with shared
/// Hermite-form inner polynomials.
struct ComposedPoly {
  std::shared_ptr<const HermiteExpansion> inner;   // R^n -> R^k
  std::shared_ptr<const BernsteinApprox> outer;    // scalar on a ball in R^k
  double scale = 1.0;
  double shift = 0.0;
};

/// Scalar polynomial handle over Gaussian space. Hermite-backed polynomials
/// carry exact moments; composed ones get Monte-Carlo moments with a pinned
/// stream so the estimate is a pure function of (poly, seed).
class ScalarPoly {
 public:
  static ScalarPoly from_hermite(HermiteExpansion e) {
    ScalarPoly p;
    require(e.dim_out() == 1, errc::dim_mismatch, "scalar polynomial needs k = 1");
    int deg = 0;
    for (const auto& [s, c] : e.coeffs()) deg = std::max(deg, s.order());
    p.degree_ = deg;
    p.dim_in_ = e.dim_in();
    p.form_ = std::make_shared<HermiteExpansion>(std::move(e));
    return p;
  }

  static ScalarPoly from_composed(ComposedPoly c, int symbolic_degree) {
    ScalarPoly p;
    p.degree_ = symbolic_degree;
    p.dim_in_ = c.inner->dim_in();
    p.form_ = std::make_shared<ComposedPoly>(std::move(c));
    return p;
  }

  int degree() const { return degree_; }
  int dim_in() const { return dim_in_; }

  bool has_hermite() const { return std::holds_alternative<HermitePtr>(form_); }
  const HermiteExpansion& hermite() const { return *std::get<HermitePtr>(form_); }
  bool is_composed() const { return std::holds_alternative<ComposedPtr>(form_); }
  const ComposedPoly& composed() const { return *std::get<ComposedPtr>(form_); }

  double operator()(std::span<const double> x) const {
    if (has_hermite()) {
      double out;
      std::get<HermitePtr>(form_)->eval(x, std::span<double>(&out, 1));
      return out;
    }
    const ComposedPoly& c = composed();
    thread_local std::vector<double> z;
    z.resize(c.inner->dim_out());
    c.inner->eval(x, z);
    return c.scale * c.outer->eval(z) + c.shift;
  }

  /// a*p + b, exact on Hermite-backed forms.
  ScalarPoly affine(double a, double b) const {
    ScalarPoly p = *this;
    if (has_hermite()) {
      const HermiteExpansion& e = hermite();
      HermiteExpansion out(e.dim_in(), 1, e.max_degree());
      for (const auto& [s, c] : e.coeffs()) out.set(s, {c[0] * a});
      std::vector<double> c0 = out.coeff(MultiIndex{});
      out.set(MultiIndex{}, {c0[0] + b});
      p.form_ = std::make_shared<HermiteExpansion>(std::move(out));
      return p;
    }
    ComposedPoly c = composed();
    c.shift = a * c.shift + b;
    c.scale *= a;
    p.form_ = std::make_shared<ComposedPoly>(std::move(c));
    return p;
  }

  /// Gaussian mean and variance: exact for Hermite-backed, Monte-Carlo with
  /// the given (samples, seed) otherwise.
  struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    bool exact = true;
  };

  Moments moments(std::uint64_t mc_samples = 1 << 16, std::uint64_t seed = 0x6d6f6d) const {
    Moments m;
    if (has_hermite()) {
      const HermiteExpansion& e = hermite();
      m.mean = e.mean()[0];
      m.variance = e.variance(0);
      return m;
    }
    m.exact = false;
    std::vector<double> x(dim_in_);
    double s1 = 0.0, s2 = 0.0;
    for (std::uint64_t i = 0; i < mc_samples; ++i) {
      gaussian_vector(seed, 0x706d, i, x);
      double v = (*this)(x);
      s1 += v;
      s2 += v * v;
    }
    double n = static_cast<double>(mc_samples);
    m.mean = s1 / n;
    m.variance = std::max(0.0, s2 / n - m.mean * m.mean);
    return m;
  }

 private:
  using HermitePtr = std::shared_ptr<const HermiteExpansion>;
  using ComposedPtr = std::shared_ptr<const ComposedPoly>;

  ScalarPoly() = default;

  int degree_ = 0;
  int dim_in_ = 0;
  std::variant<HermitePtr, ComposedPtr> form_;
};

}  // namespace gnisim
