#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnisim/errors.hpp"
#include "gnisim/estimator.hpp"
#include "gnisim/expansion.hpp"
#include "gnisim/simplex.hpp"
#include "gnisim/vector_function.hpp"

namespace gnisim {

/// Orthonormal family g_1..g_m with g_1 constant. When the family is the
/// Hermite basis, the indices are kept so results can be returned as
/// expansions.
struct BoostBasis {
  std::vector<std::function<double(std::span<const double>)>> fns;
  std::optional<std::vector<MultiIndex>> hermite_indices;

  int size() const { return static_cast<int>(fns.size()); }
};

inline BoostBasis hermite_boost_basis(int n, int d) {
  BoostBasis basis;
  std::vector<MultiIndex> indices = multi_indices_up_to(n, d);
  for (const MultiIndex& s : indices)
    basis.fns.push_back([s, d](std::span<const double> x) {
      HermiteTable table(static_cast<int>(x.size()), d, x);
      return table.value(s);
    });
  basis.hermite_indices = std::move(indices);
  return basis;
}

struct BoostTracePoint {
  int t = 0;
  double rho_sq = 0.0;
  double psi = 0.0;
  double alignment = 0.0;  // estimate of E<F - F_t, J_t>, equals rho_sq in theory
};

struct BoostResult {
  std::vector<std::vector<double>> kappa;  // m x k coefficients of the inner combination
  VectorFunction f_proj;
  std::vector<BoostTracePoint> trace;
  int iterations = 0;
  double final_mismatch = 0.0;  // rho^2 at termination
  double kappa_sq_norm = 0.0;
};

struct BoostOptions {
  double gram_tol = 1e-8;
  double quad_stop_margin = 1e-8;
  int budget_slack = 1;
};

namespace detail {

struct BoostWork {
  int m = 0, k = 0, points = 0;
  std::vector<double> basis_vals;  // m x points
  std::vector<double> f_vals;      // points x k
  std::vector<double> beta;        // m x k

  double dot_row(int i, const std::vector<double>& vals, int j, int kk,
                 const DiscreteMeasure& mu) const {
    double s = 0.0;
    for (int p = 0; p < points; ++p)
      s += mu.weights[p] * basis_vals[static_cast<std::size_t>(i) * points + p] *
           vals[static_cast<std::size_t>(p) * kk + j];
    return s;
  }
};

}  // namespace detail

/// Figure-1 iteration: starting from the simplex center, repeatedly add half
/// of the residual spectrum J_t and re-project, until the spectral mismatch
/// rho_t^2 drops to delta. All expectations are taken against the supplied
/// fixed measure, which is what makes the potential argument hold to float
/// precision.
inline BoostResult run_boost(const VectorFunction& F, const BoostBasis& basis, double delta,
                             const DiscreteMeasure& mu, const BoostOptions& opts = {}) {
  require(delta > 0.0, errc::invalid_input, "run_boost: delta <= 0");
  require(F.dim_in() == mu.dim, errc::dim_mismatch, "run_boost: measure dimension mismatch");
  const int m = basis.size();
  const int k = F.dim_out();
  const int P = mu.count();

  detail::BoostWork w;
  w.m = m;
  w.k = k;
  w.points = P;
  w.basis_vals.resize(static_cast<std::size_t>(m) * P);
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < P; ++p)
      w.basis_vals[static_cast<std::size_t>(i) * P + p] = basis.fns[i](mu.point(p));

  // g_1 must be the constant 1 and the family orthonormal under mu.
  for (int p = 0; p < P; ++p)
    require(std::fabs(w.basis_vals[p] - 1.0) <= opts.gram_tol, errc::non_orthonormal_basis,
            "run_boost: g_1 is not the constant function");
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      double dot = 0.0;
      for (int p = 0; p < P; ++p)
        dot += mu.weights[p] * w.basis_vals[static_cast<std::size_t>(i) * P + p] *
               w.basis_vals[static_cast<std::size_t>(j) * P + p];
      double target = i == j ? 1.0 : 0.0;
      require(std::fabs(dot - target) <= opts.gram_tol, errc::non_orthonormal_basis,
              "run_boost: Gram deviation at (" + std::to_string(i) + "," + std::to_string(j) +
                  ") = " + std::to_string(dot - target));
    }
  }

  w.f_vals.resize(static_cast<std::size_t>(P) * k);
  {
    std::vector<double> fx(k);
    for (int p = 0; p < P; ++p) {
      F.eval(mu.point(p), fx);
      for (int j = 0; j < k; ++j) w.f_vals[static_cast<std::size_t>(p) * k + j] = fx[j];
    }
  }

  w.beta.resize(static_cast<std::size_t>(m) * k);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j)
      w.beta[static_cast<std::size_t>(i) * k + j] = w.dot_row(i, w.f_vals, j, k, mu);

  // kappa holds the coefficients of G_t; G_0 = (1/k, ..., 1/k) rides on g_1.
  std::vector<std::vector<double>> kappa(m, std::vector<double>(k, 0.0));
  for (int j = 0; j < k; ++j) kappa[0][j] = 1.0 / k;

  const int budget = static_cast<int>(std::ceil(4.0 / delta)) + opts.budget_slack;
  std::vector<double> g_vals(static_cast<std::size_t>(P) * k);
  std::vector<double> ft_vals(static_cast<std::size_t>(P) * k);
  std::vector<double> beta_t(static_cast<std::size_t>(m) * k);
  std::vector<double> proj(k);

  BoostResult res;
  int t = 0;
  while (true) {
    // G_t and F_t = Proj(G_t) at the nodes
    for (int p = 0; p < P; ++p) {
      for (int j = 0; j < k; ++j) g_vals[static_cast<std::size_t>(p) * k + j] = 0.0;
      for (int i = 0; i < m; ++i) {
        double gv = w.basis_vals[static_cast<std::size_t>(i) * P + p];
        if (gv == 0.0) continue;
        for (int j = 0; j < k; ++j)
          g_vals[static_cast<std::size_t>(p) * k + j] += kappa[i][j] * gv;
      }
      proj_simplex(std::span<const double>(g_vals.data() + static_cast<std::size_t>(p) * k, k),
                   proj);
      for (int j = 0; j < k; ++j) ft_vals[static_cast<std::size_t>(p) * k + j] = proj[j];
    }

    for (int i = 0; i < m; ++i)
      for (int j = 0; j < k; ++j)
        beta_t[static_cast<std::size_t>(i) * k + j] = w.dot_row(i, ft_vals, j, k, mu);

    double rho_sq = 0.0;
    for (std::size_t idx = 0; idx < beta_t.size(); ++idx) {
      double d = w.beta[idx] - beta_t[idx];
      rho_sq += d * d;
    }

    // Psi(t) = E<F - F_t, F - 2 G_t + F_t> and the Claim-14 alignment
    double psi = 0.0, align = 0.0;
    for (int p = 0; p < P; ++p) {
      double acc = 0.0, jdot = 0.0;
      for (int j = 0; j < k; ++j) {
        std::size_t idx = static_cast<std::size_t>(p) * k + j;
        double df = w.f_vals[idx] - ft_vals[idx];
        acc += df * (w.f_vals[idx] - 2.0 * g_vals[idx] + ft_vals[idx]);
        double jt = 0.0;
        for (int i = 0; i < m; ++i)
          jt += (w.beta[static_cast<std::size_t>(i) * k + j] -
                 beta_t[static_cast<std::size_t>(i) * k + j]) *
                w.basis_vals[static_cast<std::size_t>(i) * P + p];
        jdot += df * jt;
      }
      psi += mu.weights[p] * acc;
      align += mu.weights[p] * jdot;
    }
    res.trace.push_back(BoostTracePoint{t, rho_sq, psi, align});

    double margin = mu.is_quadrature ? opts.quad_stop_margin : 0.0;
    if (!mu.is_quadrature) {
      // conservative stop under sampling noise: subtract a 3-sigma
      // delta-method half-width for rho^2 plus its upward bias
      double bias = 0.0, var = 0.0;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < k; ++j) {
          double mean_diff = 0.0, mean_sq = 0.0;
          for (int p = 0; p < P; ++p) {
            std::size_t idx = static_cast<std::size_t>(p) * k + j;
            double contrib = w.basis_vals[static_cast<std::size_t>(i) * P + p] *
                             (w.f_vals[idx] - ft_vals[idx]);
            mean_diff += mu.weights[p] * contrib;
            mean_sq += mu.weights[p] * contrib * contrib;
          }
          double se_sq = std::max(0.0, mean_sq - mean_diff * mean_diff) / P;
          bias += se_sq;
          var += 4.0 * mean_diff * mean_diff * se_sq;
        }
      }
      margin = bias + 3.0 * std::sqrt(var);
    }

    if (rho_sq <= delta - std::min(margin, 0.5 * delta)) {
      res.final_mismatch = rho_sq;
      break;
    }
    require(t < budget, errc::budget_exceeded,
            "run_boost: passed ceil(4/delta)+" + std::to_string(opts.budget_slack) +
                " iterations (estimator noise?)");

    for (int i = 0; i < m; ++i)
      for (int j = 0; j < k; ++j)
        kappa[i][j] += 0.5 * (w.beta[static_cast<std::size_t>(i) * k + j] -
                              beta_t[static_cast<std::size_t>(i) * k + j]);
    ++t;
  }

  res.iterations = t;
  res.kappa = kappa;
  for (const auto& row : kappa)
    for (double v : row) res.kappa_sq_norm += v * v;

  if (basis.hermite_indices) {
    int max_d = 0;
    for (const MultiIndex& s : *basis.hermite_indices) max_d = std::max(max_d, s.order());
    HermiteExpansion inner(F.dim_in(), k, max_d);
    for (int i = 0; i < m; ++i) inner.set((*basis.hermite_indices)[i], kappa[i]);
    res.f_proj = VectorFunction::projected_poly(std::move(inner));
  } else {
    auto fns = std::make_shared<BoostBasis>(basis);
    auto coeff = std::make_shared<std::vector<std::vector<double>>>(kappa);
    res.f_proj = VectorFunction::black_box(
        F.dim_in(), k, [fns, coeff, k](std::span<const double> x, std::span<double> out) {
          std::vector<double> z(k, 0.0);
          for (std::size_t i = 0; i < fns->fns.size(); ++i) {
            double gv = fns->fns[i](x);
            for (int j = 0; j < k; ++j) z[j] += (*coeff)[i][j] * gv;
          }
          proj_simplex(z, out);
        });
  }
  return res;
}

/// Psi = E<F - F_t, F - 2 G_t + F_t> under the given measure.
inline double potential(const VectorFunction& F, const VectorFunction& F_t,
                        const VectorFunction& G_t, const DiscreteMeasure& mu) {
  require(F.dim_out() == F_t.dim_out() && F.dim_out() == G_t.dim_out(), errc::dim_mismatch,
          "potential: dim_out mismatch");
  const int k = F.dim_out();
  std::vector<double> a(k), b(k), c(k);
  double psi = 0.0;
  for (int p = 0; p < mu.count(); ++p) {
    auto x = mu.point(p);
    F.eval(x, a);
    F_t.eval(x, b);
    G_t.eval(x, c);
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += (a[j] - b[j]) * (a[j] - 2.0 * c[j] + b[j]);
    psi += mu.weights[p] * acc;
  }
  return psi;
}

struct BoostMatchResult {
  VectorFunction f_proj;          // Proj of the degree-<=d polynomial
  HermiteExpansion alpha;         // its inner coefficients
  BoostResult details;
};

/// Match the degree-<=d Hermite spectrum of a simplex-valued f by a
/// projected polynomial. The default measure is tensor Gauss-Hermite with
/// 2d+4 nodes per axis.
inline BoostMatchResult boost_match(const VectorFunction& f, int d, double delta,
                                    std::optional<DiscreteMeasure> measure = std::nullopt,
                                    const BoostOptions& opts = {}) {
  DiscreteMeasure mu = measure ? std::move(*measure) : quadrature_measure(f.dim_in(), 2 * d + 4);
  BoostBasis basis = hermite_boost_basis(f.dim_in(), d);
  BoostResult res = run_boost(f, basis, delta, mu, opts);
  HermiteExpansion alpha(f.dim_in(), f.dim_out(), d);
  for (int i = 0; i < basis.size(); ++i) alpha.set((*basis.hermite_indices)[i], res.kappa[i]);
  return BoostMatchResult{res.f_proj, std::move(alpha), std::move(res)};
}

struct FsmResult {
  VectorFunction f_sm;
  HermiteExpansion alpha;
  int degree = 0;
  double delta_boost = 0.0;       // spectral tolerance fed to the iteration
  double variance_bound = 0.0;    // k^8 / delta^4
  double max_coord_variance = 0.0;
  BoostResult details;
};

/// Degree prescribed by the noise rate: ceil((2/t) log(k^2/delta)).
inline int fsm_degree(double t, int k, double delta) {
  return static_cast<int>(std::ceil((2.0 / t) * std::log(static_cast<double>(k) * k / delta)));
}

/// Spectrum-matched projected polynomial at the prescribed degree, with the
/// boost tolerance delta^2/k^4 that makes k x k correlation tables track
/// within delta. Verifies the per-coordinate variance bound k^8/delta^4.
inline FsmResult build_fsm(const VectorFunction& f, double t, double delta,
                           std::optional<DiscreteMeasure> measure = std::nullopt,
                           const BoostOptions& opts = {}) {
  require(t > 0.0 && delta > 0.0, errc::invalid_input, "build_fsm: t, delta must be positive");
  const int k = f.dim_out();
  const int d = fsm_degree(t, k, delta);
  const double delta_boost = delta * delta / (std::pow(static_cast<double>(k), 4));
  BoostMatchResult m = boost_match(f, d, delta_boost, std::move(measure), opts);
  FsmResult out{m.f_proj, std::move(m.alpha), d, delta_boost,
                std::pow(static_cast<double>(k), 8) / std::pow(delta, 4), 0.0,
                std::move(m.details)};
  for (int j = 0; j < k; ++j)
    out.max_coord_variance = std::max(out.max_coord_variance, out.alpha.variance(j));
  require(out.max_coord_variance <= out.variance_bound * (1.0 + 1e-9), errc::precondition_violated,
          "build_fsm: coordinate variance exceeds k^8/delta^4");
  return out;
}

}  // namespace gnisim
