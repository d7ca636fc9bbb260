#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gnisim/errors.hpp"
#include "gnisim/linalg.hpp"
#include "gnisim/normal.hpp"

namespace gnisim {

namespace detail {

// Adaptive Simpson on [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Fixed pre-subdivision before the adaptive pass, so narrow interior
/// features cannot hide between the first few sample points.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                        int panels = 40) {
  double total = 0.0;
  double h = (b - a) / panels;
  double per_tol = tol / panels;
  for (int i = 0; i < panels; ++i) {
    double lo = a + i * h, hi = a + (i + 1) * h;
    double m = 0.5 * (lo + hi);
    double fa = f(lo), fm = f(m), fb = f(hi);
    double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += adaptive_simpson(f, lo, hi, fa, fm, fb, whole, per_tol, 40);
  }
  return total;
}

}  // namespace detail

/// Pr[X > k1, Y > k2] for a rho-correlated standard Gaussian pair, by 1-D
/// adaptive quadrature of the conditional tail (robust near |rho| -> 1,
/// where those cases are split off in closed form). Absolute error <= 1e-8.
inline double binorm_orthant(double rho, double kappa1, double kappa2) {
  require(rho >= -1.0 && rho <= 1.0, errc::invalid_rho, "binorm_orthant: |rho| > 1");
  if (std::isinf(kappa1) || std::isinf(kappa2)) {
    if (kappa1 > 0 && std::isinf(kappa1)) return 0.0;
    if (kappa2 > 0 && std::isinf(kappa2)) return 0.0;
    if (std::isinf(kappa1) && kappa1 < 0) return std::isinf(kappa2) ? 1.0 : normal_sf(kappa2);
    return normal_sf(kappa1);
  }
  if (rho == 1.0) return normal_sf(std::max(kappa1, kappa2));
  if (rho == -1.0) return std::max(0.0, normal_cdf(-kappa2) - normal_cdf(kappa1));
  if (rho == 0.0) return normal_sf(kappa1) * normal_sf(kappa2);
  double s = std::sqrt(1.0 - rho * rho);
  auto integrand = [&](double x) {
    return normal_pdf(x) * normal_cdf((rho * x - kappa2) / s);
  };
  // beyond |x| = 9.5 the integrand is below 1e-20
  double lo = std::max(kappa1, -9.5);
  if (lo >= 9.5) return 0.0;
  return detail::integrate(integrand, lo, 9.5, 1e-11);
}

struct CorrBounds {
  double corr_min = 0.0;
  double corr_max = 0.0;
  double kappa1 = 0.0;  // threshold achieving mean mu1 via 1_{x > kappa1}
  double kappa2 = 0.0;
};

/// Agreement probability of the aligned pair (1_{x>k1}, 1_{y>k2}).
inline double threshold_agreement(double rho, double mu1, double mu2) {
  double k1 = normal_inv(1.0 - mu1);
  double k2 = normal_inv(1.0 - mu2);
  double both = binorm_orthant(rho, k1, k2);
  return 2.0 * both + 1.0 - mu1 - mu2;
}

/// Borell's extremal agreement probabilities for prescribed means: aligned
/// thresholds achieve the max, anti-aligned the min.
inline CorrBounds corr_bounds(double rho, double mu1, double mu2) {
  require(rho >= 0.0 && rho <= 1.0, errc::invalid_input, "corr_bounds: rho outside [0,1]");
  require(mu1 >= 0.0 && mu1 <= 1.0 && mu2 >= 0.0 && mu2 <= 1.0, errc::invalid_input,
          "corr_bounds: means outside [0,1]");
  CorrBounds b;
  b.kappa1 = normal_inv(1.0 - mu1);
  b.kappa2 = normal_inv(1.0 - mu2);
  b.corr_max = threshold_agreement(rho, mu1, mu2);
  // anti-aligned partner h = 1_{y < c} with Phi(c) = mu2:
  //   Pr[f=h=1] = mu1 - Pr[X>k1, Y>=c],  Pr[f=h=0] = (1-mu2) - Pr[X>k1, Y>=c]
  double c = normal_inv(mu2);
  double upper = binorm_orthant(rho, b.kappa1, c);
  b.corr_min = 1.0 + mu1 - mu2 - 2.0 * upper;
  if (b.corr_min > b.corr_max) std::swap(b.corr_min, b.corr_max);
  return b;
}

struct BinaryTarget {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double eta = 0.0;  // Pr[U = V]
};

struct IntervalStrategy {
  double a = 0.0;  // g = 1 on (a, b]
  double b = 0.0;
};

struct DecisionK2 {
  bool feasible = false;
  double corr_min = 0.0;
  double corr_max = 0.0;
  double gap = 0.0;                       // distance to the violated bound when infeasible
  std::string violated;                   // "min" or "max"
  double f_threshold = 0.0;               // Alice: 1_{x > f_threshold}
  std::optional<IntervalStrategy> g_eta;  // Bob's interval when feasible
  bool rho_negated = false;
};

/// Agreement of (1_{x > k1}, 1_{y in (a, b]}).
inline double interval_agreement(double rho, double kappa1, double a, double b) {
  double in_upper = binorm_orthant(rho, kappa1, a) - binorm_orthant(rho, kappa1, b);
  double mu1 = normal_sf(kappa1);
  double mass = normal_cdf(b) - normal_cdf(a);
  // agree = Pr[X>k1, Y in] + Pr[X<=k1, Y out]
  return in_upper + (1.0 - mu1) - (mass - in_upper);
}

/// Exact k=2 feasibility over the rho-correlated Gaussian source: a target
/// (mu1, mu2, eta) is achievable iff eta lies in the Borell sandwich. The
/// witness strategy fixes Alice at a threshold and slides Bob's interval of
/// mass mu2 until the agreement hits eta (monotone in the interval's start,
/// which is verified numerically).
inline DecisionK2 decide_k2(double rho, const BinaryTarget& target, double delta = 1e-6) {
  require(target.eta >= 0.0 && target.eta <= 1.0, errc::invalid_input, "decide_k2: eta outside [0,1]");
  DecisionK2 out;
  double mu2 = target.mu2;
  double eta = target.eta;
  if (rho < 0.0) {
    // negate Bob's coordinate: correlation flips, Bob's set complements
    out.rho_negated = true;
    rho = -rho;
    mu2 = 1.0 - mu2;
    eta = 1.0 - eta;
  }
  CorrBounds bounds = corr_bounds(rho, target.mu1, mu2);
  out.corr_min = bounds.corr_min;
  out.corr_max = bounds.corr_max;
  out.f_threshold = bounds.kappa1;
  if (eta < bounds.corr_min - delta) {
    out.feasible = false;
    out.violated = "min";
    out.gap = bounds.corr_min - eta;
    return out;
  }
  if (eta > bounds.corr_max + delta) {
    out.feasible = false;
    out.violated = "max";
    out.gap = eta - bounds.corr_max;
    return out;
  }
  out.feasible = true;

  // Bisection over the interval's lower quantile u: interval (a, b] with
  // Phi(a) = u*(1 - mu2), Phi(b) = Phi(a) + mu2 sweeps agreement from
  // corr_min (u = 0) to corr_max (u = 1).
  auto agreement_at = [&](double u) {
    double pa = u * (1.0 - mu2);
    double a = normal_inv(pa);
    double b = normal_inv(pa + mu2);
    return interval_agreement(rho, bounds.kappa1, a, b);
  };
  // numerical monotonicity check along the sweep
  double prev = agreement_at(0.0);
  for (int i = 1; i <= 16; ++i) {
    double cur = agreement_at(i / 16.0);
    require(cur >= prev - 1e-7, errc::nonmonotone,
            "decide_k2: interval agreement is not monotone in the sweep");
    prev = cur;
  }
  double lo = 0.0, hi = 1.0;
  double eta_clamped = std::min(std::max(eta, bounds.corr_min), bounds.corr_max);
  for (int iter = 0; iter < 200; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (agreement_at(mid) < eta_clamped)
      lo = mid;
    else
      hi = mid;
  }
  double u = 0.5 * (lo + hi);
  double pa = u * (1.0 - mu2);
  out.g_eta = IntervalStrategy{normal_inv(pa), normal_inv(pa + mu2)};
  return out;
}

/// Finite-support joint distribution on Z x Z.
struct FiniteJoint {
  int rows = 0, cols = 0;
  std::vector<double> mass;  // rows x cols, entries >= 0, sum 1

  double& at(int i, int j) { return mass[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return mass[static_cast<std::size_t>(i) * cols + j]; }

  void validate() const {
    double sum = 0.0;
    for (double v : mass) {
      require(v >= 0.0, errc::invalid_input, "FiniteJoint: negative mass");
      sum += v;
    }
    require(std::fabs(sum - 1.0) <= 1e-12, errc::invalid_input, "FiniteJoint: mass != 1");
  }
};

struct MaxCorrelation {
  double rho = 0.0;
  bool degenerate = false;  // a marginal is a point mass
};

/// Maximal correlation of a finite joint distribution: the second singular
/// value of M[x,y] = P(x,y) / sqrt(P_X(x) P_Y(y)), zero-mass rows and
/// columns dropped first. Clamped to [0,1].
inline MaxCorrelation max_correlation(const FiniteJoint& joint) {
  joint.validate();
  std::vector<double> px(joint.rows, 0.0), py(joint.cols, 0.0);
  for (int i = 0; i < joint.rows; ++i)
    for (int j = 0; j < joint.cols; ++j) {
      px[i] += joint.at(i, j);
      py[j] += joint.at(i, j);
    }
  std::vector<int> rkeep, ckeep;
  for (int i = 0; i < joint.rows; ++i)
    if (px[i] > 0.0) rkeep.push_back(i);
  for (int j = 0; j < joint.cols; ++j)
    if (py[j] > 0.0) ckeep.push_back(j);
  MaxCorrelation out;
  if (rkeep.size() <= 1 || ckeep.size() <= 1) {
    out.degenerate = true;
    return out;
  }
  int m = static_cast<int>(rkeep.size()), n = static_cast<int>(ckeep.size());
  std::vector<double> mat(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      mat[static_cast<std::size_t>(i) * n + j] =
          joint.at(rkeep[i], ckeep[j]) / std::sqrt(px[rkeep[i]] * py[ckeep[j]]);
  std::vector<double> sv = singular_values(mat, m, n);
  out.rho = sv.size() > 1 ? std::min(1.0, std::max(0.0, sv[1])) : 0.0;
  return out;
}

}  // namespace gnisim
