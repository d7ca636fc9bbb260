#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gnisim/errors.hpp"
#include "gnisim/poly.hpp"

namespace gnisim {

/// Mean bound of a (d, delta)-balanced PPF: d * log^{d/2}(1/delta).
inline double ppf_balance_mean_bound(int d, double delta) {
  return d * std::pow(std::log(1.0 / delta), d / 2.0);
}

struct BalanceTag {
  int d = 0;
  double delta = 0.0;
  bool mean_clamped = false;
  bool moments_exact = true;
};

/// Polynomial plurality function: outputs e_j where p > 0, the zero vector
/// otherwise.
struct PpfSpec {
  ScalarPoly poly;
  int index_j = 0;  // 0-based coordinate
  int k = 0;
  std::optional<BalanceTag> balance;

  int degree() const { return poly.degree(); }
};

inline void ppf_eval(const PpfSpec& ppf, std::span<const double> x, std::span<double> out) {
  for (double& v : out) v = 0.0;
  if (ppf.poly(x) > 0.0) out[ppf.index_j] = 1.0;
}

inline std::vector<double> ppf_eval(const PpfSpec& ppf, std::span<const double> x) {
  std::vector<double> out(ppf.k, 0.0);
  ppf_eval(ppf, x, out);
  return out;
}

/// Rescale to unit variance; clamp the mean at d*log^{d/2}(1/delta) when it
/// exceeds that bound (changing the sign pattern on a small-probability
/// set). Moments are exact for Hermite-backed polynomials and Monte-Carlo
/// (pinned stream) for composed ones.
inline PpfSpec balance_ppf(const PpfSpec& ppf, double delta, std::uint64_t moment_samples = 1 << 16,
                           std::uint64_t moment_seed = 0x62616c) {
  ScalarPoly::Moments m = ppf.poly.moments(moment_samples, moment_seed);
  require(m.variance > 0.0, errc::zero_variance, "balance_ppf: variance is zero");
  double sigma = std::sqrt(m.variance);
  ScalarPoly scaled = ppf.poly.affine(1.0 / sigma, 0.0);
  double mean = m.mean / sigma;
  double bound = ppf_balance_mean_bound(ppf.degree(), delta);
  PpfSpec out = ppf;
  BalanceTag tag{ppf.degree(), delta, false, m.exact};
  if (std::fabs(mean) > bound) {
    // q = p - E[p] + bound * sign(E[p])
    scaled = scaled.affine(1.0, -mean + bound * (mean > 0 ? 1.0 : -1.0));
    tag.mean_clamped = true;
  }
  out.poly = std::move(scaled);
  out.balance = tag;
  return out;
}

/// Convex-ish combination of PPFs, stored in grouped form: each group holds
/// one base polynomial and a list of affine steps; step (w, a, b) is the PPF
/// of a*base + b at the group's coordinate, with weight w. Grouping lets a
/// staircase of thresholds over one expensive polynomial evaluate the base
/// once. Every evaluation lands in the positive orthant with sup-norm <= 1
/// as long as per-coordinate weights sum to <= 1.
struct PpfMixture {
  struct Step {
    double weight = 0.0;
    double scale = 1.0;
    double shift = 0.0;
    std::optional<BalanceTag> balance;
  };
  struct Group {
    ScalarPoly poly;
    int index_j = 0;
    std::vector<Step> steps;
  };

  int dim_in = 0;
  int k = 0;
  std::vector<Group> groups;

  /// One PPF per step; weights listed alongside.
  std::size_t term_count() const {
    std::size_t c = 0;
    for (const Group& g : groups) c += g.steps.size();
    return c;
  }

  /// Materialize the PPF of one step (poly = scale*base + shift).
  PpfSpec term(const Group& g, std::size_t step_idx) const {
    const Step& s = g.steps[step_idx];
    return PpfSpec{g.poly.affine(s.scale, s.shift), g.index_j, k, s.balance};
  }

  static PpfMixture from_terms(int dim_in, int k,
                               const std::vector<std::pair<double, PpfSpec>>& terms) {
    PpfMixture m;
    m.dim_in = dim_in;
    m.k = k;
    for (const auto& [w, ppf] : terms) {
      Group g{ppf.poly, ppf.index_j, {Step{w, 1.0, 0.0, ppf.balance}}};
      m.groups.push_back(std::move(g));
    }
    return m;
  }

  void eval(std::span<const double> x, std::span<double> out) const {
    for (double& v : out) v = 0.0;
    // groups often share one composed backbone (same inner and outer,
    // different affine wrap); evaluate each distinct backbone once
    thread_local std::vector<std::pair<const void*, double>> outer_cache;
    thread_local std::vector<std::pair<const void*, std::vector<double>>> inner_cache;
    outer_cache.clear();
    for (auto& e : inner_cache) e.first = nullptr;
    for (const Group& g : groups) {
      double base;
      if (g.poly.is_composed()) {
        const ComposedPoly& c = g.poly.composed();
        const void* okey = c.outer.get();
        double oval = 0.0;
        bool hit = false;
        for (const auto& e : outer_cache)
          if (e.first == okey) {
            oval = e.second;
            hit = true;
            break;
          }
        if (!hit) {
          const void* ikey = c.inner.get();
          std::vector<double>* z = nullptr;
          for (auto& e : inner_cache)
            if (e.first == ikey) {
              z = &e.second;
              break;
            }
          if (!z) {
            for (auto& e : inner_cache)
              if (e.first == nullptr) {
                e.first = ikey;
                z = &e.second;
                break;
              }
            if (!z) {
              inner_cache.emplace_back(ikey, std::vector<double>());
              z = &inner_cache.back().second;
            }
            z->resize(c.inner->dim_out());
            c.inner->eval(x, *z);
          }
          oval = c.outer->eval(*z);
          outer_cache.emplace_back(okey, oval);
        }
        base = c.scale * oval + c.shift;
      } else {
        base = g.poly(x);
      }
      for (const Step& s : g.steps)
        if (s.scale * base + s.shift > 0.0) out[g.index_j] += s.weight;
    }
  }

  std::vector<double> eval(std::span<const double> x) const {
    std::vector<double> out(k, 0.0);
    eval(x, out);
    return out;
  }
};

}  // namespace gnisim
