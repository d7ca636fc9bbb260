#pragma once

#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "gnisim/errors.hpp"
#include "gnisim/expansion.hpp"
#include "gnisim/ppf.hpp"
#include "gnisim/simplex.hpp"

namespace gnisim {

/// Evaluable R^n -> R^k with a declared structural form. Cheap to copy,
/// immutable, safe to share across threads.
class VectorFunction {
 public:
  enum class Form { kBlackBox, kTruncatedSeries, kProjectedPoly, kPpfMixture };

  using Eval = std::function<void(std::span<const double>, std::span<double>)>;

  /// Empty handle; assign a factory result before evaluating.
  VectorFunction() = default;

  static VectorFunction black_box(int dim_in, int dim_out, Eval eval) {
    VectorFunction f;
    f.n_ = dim_in;
    f.k_ = dim_out;
    f.form_ = Form::kBlackBox;
    f.payload_ = std::make_shared<Payload>(Payload{std::move(eval), nullptr, nullptr});
    return f;
  }

  static VectorFunction truncated_series(HermiteExpansion e) {
    VectorFunction f;
    f.n_ = e.dim_in();
    f.k_ = e.dim_out();
    f.form_ = Form::kTruncatedSeries;
    auto series = std::make_shared<const HermiteExpansion>(std::move(e));
    f.payload_ = std::make_shared<Payload>(Payload{{}, series, nullptr});
    return f;
  }

  /// Proj composed with a polynomial given by its Hermite expansion.
  static VectorFunction projected_poly(HermiteExpansion e) {
    VectorFunction f;
    f.n_ = e.dim_in();
    f.k_ = e.dim_out();
    f.form_ = Form::kProjectedPoly;
    auto series = std::make_shared<const HermiteExpansion>(std::move(e));
    f.payload_ = std::make_shared<Payload>(Payload{{}, series, nullptr});
    return f;
  }

  static VectorFunction ppf_mixture(PpfMixture m) {
    VectorFunction f;
    f.n_ = m.dim_in;
    f.k_ = m.k;
    f.form_ = Form::kPpfMixture;
    auto mix = std::make_shared<const PpfMixture>(std::move(m));
    f.payload_ = std::make_shared<Payload>(Payload{{}, nullptr, mix});
    return f;
  }

  int dim_in() const { return n_; }
  int dim_out() const { return k_; }
  Form form() const { return form_; }

  /// Series payload for the series-backed forms (null otherwise).
  const HermiteExpansion* series() const { return payload_->series.get(); }
  const PpfMixture* mixture() const { return payload_->mixture.get(); }

  void eval(std::span<const double> x, std::span<double> out) const {
    switch (form_) {
      case Form::kBlackBox:
        payload_->fn(x, out);
        return;
      case Form::kTruncatedSeries:
        payload_->series->eval(x, out);
        return;
      case Form::kProjectedPoly: {
        std::vector<double> z(k_);
        payload_->series->eval(x, z);
        proj_simplex(z, out);
        return;
      }
      case Form::kPpfMixture:
        payload_->mixture->eval(x, out);
        return;
    }
  }

  std::vector<double> operator()(std::span<const double> x) const {
    std::vector<double> out(k_);
    eval(x, out);
    return out;
  }

 private:
  struct Payload {
    Eval fn;
    std::shared_ptr<const HermiteExpansion> series;
    std::shared_ptr<const PpfMixture> mixture;
  };

  int n_ = 0, k_ = 0;
  Form form_ = Form::kBlackBox;
  std::shared_ptr<const Payload> payload_;
};

/// Vertex embedding of a [k]-valued label function: i -> e_i.
inline VectorFunction vertex_function(int dim_in, int k,
                                      std::function<int(std::span<const double>)> label) {
  return VectorFunction::black_box(
      dim_in, k, [k, label = std::move(label)](std::span<const double> x, std::span<double> out) {
        for (double& v : out) v = 0.0;
        int i = label(x);
        require(i >= 0 && i < k, errc::invalid_input, "label outside [k]");
        out[i] = 1.0;
      });
}

}  // namespace gnisim
