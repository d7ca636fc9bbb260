#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gnisim/correlation.hpp"
#include "gnisim/errors.hpp"
#include "gnisim/expansion.hpp"
#include "gnisim/feasibility.hpp"
#include "gnisim/ppf.hpp"
#include "gnisim/sampling.hpp"
#include "gnisim/smoothing.hpp"
#include "gnisim/spectrum_boost.hpp"
#include "gnisim/vector_function.hpp"

namespace gnisim {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Deterministic emission: numbers at 17 significant digits, keys in the
// order nlohmann keeps them (sorted), so identical values give identical
// bytes.

namespace detail {

inline void dump_17(const json& v, std::string& out) {
  switch (v.type()) {
    case json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
      out += buf;
      return;
    }
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ',';
        first = false;
        dump_17(e, out);
      }
      out += ']';
      return;
    }
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump_17(it.value(), out);
      }
      out += '}';
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace detail

inline std::string dump_json_17(const json& v) {
  std::string out;
  detail::dump_17(v, out);
  out += '\n';
  return out;
}

inline void write_json_17(const std::filesystem::path& path, const json& v) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), errc::io_error, "cannot open for writing: " + path.string());
  os << dump_json_17(v);
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(is.good(), errc::io_error, "cannot open: " + path.string());
  json v;
  is >> v;
  return v;
}

// ---------------------------------------------------------------------------
// Hermite expansions: {"n":..., "k":..., "coeffs":[{"S":[...], "v":[...]}]}

inline json to_json(const HermiteExpansion& e) {
  json coeffs = json::array();
  for (const auto& [s, c] : e.coeffs()) {
    json entry;
    entry["S"] = s.entries();
    entry["v"] = c;
    if (e.stderrs()) {
      auto it = e.stderrs()->find(s);
      if (it != e.stderrs()->end()) entry["se"] = it->second;
    }
    coeffs.push_back(std::move(entry));
  }
  return json{{"n", e.dim_in()}, {"k", e.dim_out()}, {"max_degree", e.max_degree()},
              {"coeffs", std::move(coeffs)}};
}

inline HermiteExpansion expansion_from_json(const json& v) {
  int n = v.at("n").get<int>();
  int k = v.at("k").get<int>();
  int d = 0;
  if (v.contains("max_degree")) {
    d = v.at("max_degree").get<int>();
  } else {
    for (const auto& entry : v.at("coeffs"))
      d = std::max(d, MultiIndex(entry.at("S").get<std::vector<int>>()).order());
  }
  HermiteExpansion e(n, k, d);
  HermiteExpansion::CoeffMap se;
  for (const auto& entry : v.at("coeffs")) {
    MultiIndex s(entry.at("S").get<std::vector<int>>());
    e.set(s, entry.at("v").get<std::vector<double>>());
    if (entry.contains("se")) se[s] = entry.at("se").get<std::vector<double>>();
  }
  if (!se.empty()) e.set_stderrs(std::move(se));
  return e;
}

// ---------------------------------------------------------------------------
// Sampler spec: {"rho":..., "dim":..., "seed":...}

inline json to_json(const GaussianPairSampler& s) {
  return json{{"rho", s.rho()}, {"dim", s.dim()}, {"seed", s.seed()}};
}

inline GaussianPairSampler sampler_from_json(const json& v) {
  return GaussianPairSampler(v.at("rho").get<double>(), v.at("dim").get<int>(),
                             v.at("seed").get<std::uint64_t>());
}

// ---------------------------------------------------------------------------
// Bernstein approximants: values go to a row-major float64 little-endian
// sidecar next to the JSON file.

inline void write_f64_sidecar(const std::filesystem::path& path, const std::vector<double>& v) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), errc::io_error, "cannot open sidecar: " + path.string());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline std::vector<double> read_f64_sidecar(const std::filesystem::path& path, std::size_t count) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), errc::io_error, "cannot open sidecar: " + path.string());
  std::vector<double> v(count);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
  require(static_cast<std::size_t>(is.gcount()) == count * sizeof(double), errc::io_error,
          "sidecar truncated: " + path.string());
  return v;
}

inline json bernstein_to_json(const BernsteinApprox& a, const std::filesystem::path& json_path,
                              const std::string& sidecar_name) {
  write_f64_sidecar(json_path.parent_path() / sidecar_name, a.values());
  json domain;
  if (a.ball()) {
    domain = json{{"type", "ball"}, {"center", a.ball()->center}, {"radius", a.ball()->radius}};
  } else {
    domain = json{{"type", "unit_box"}};
  }
  return json{{"degrees", a.degrees()}, {"domain", std::move(domain)}, {"values_ref", sidecar_name}};
}

inline BernsteinApprox bernstein_from_json(const json& v, const std::filesystem::path& json_path) {
  std::vector<int> degrees = v.at("degrees").get<std::vector<int>>();
  std::size_t count = 1;
  for (int d : degrees) count *= static_cast<std::size_t>(d + 1);
  std::vector<double> values =
      read_f64_sidecar(json_path.parent_path() / v.at("values_ref").get<std::string>(), count);
  BernsteinApprox a(std::move(degrees), std::move(values));
  const json& dom = v.at("domain");
  if (dom.at("type").get<std::string>() == "ball")
    a.set_ball(BallDomain{dom.at("center").get<std::vector<double>>(),
                          dom.at("radius").get<double>()});
  return a;
}

// ---------------------------------------------------------------------------
// Scalar polynomials (Hermite or composed forms)

inline json poly_to_json(const ScalarPoly& p, const std::filesystem::path& json_path,
                         const std::string& sidecar_prefix) {
  if (p.has_hermite()) {
    return json{{"type", "hermite"}, {"expansion", to_json(p.hermite())}};
  }
  const ComposedPoly& c = p.composed();
  return json{{"type", "composed"},
              {"degree", p.degree()},
              {"inner", to_json(*c.inner)},
              {"outer", bernstein_to_json(*c.outer, json_path, sidecar_prefix + ".f64")},
              {"scale", c.scale},
              {"shift", c.shift}};
}

inline ScalarPoly poly_from_json(const json& v, const std::filesystem::path& json_path) {
  if (v.at("type").get<std::string>() == "hermite")
    return ScalarPoly::from_hermite(expansion_from_json(v.at("expansion")));
  ComposedPoly c;
  c.inner = std::make_shared<const HermiteExpansion>(expansion_from_json(v.at("inner")));
  c.outer = std::make_shared<const BernsteinApprox>(bernstein_from_json(v.at("outer"), json_path));
  c.scale = v.at("scale").get<double>();
  c.shift = v.at("shift").get<double>();
  return ScalarPoly::from_composed(std::move(c), v.at("degree").get<int>());
}

// ---------------------------------------------------------------------------
// PPF mixtures. Grouped schema; each group carries its base polynomial and
// the affine steps (weight, scale, shift).

inline json mixture_to_json(const PpfMixture& m, const std::filesystem::path& json_path) {
  json groups = json::array();
  int gi = 0;
  for (const auto& g : m.groups) {
    json steps = json::array();
    for (const auto& s : g.steps) {
      json st{{"w", s.weight}, {"scale", s.scale}, {"shift", s.shift}};
      if (s.balance)
        st["balance"] = json{{"d", s.balance->d},
                             {"delta", s.balance->delta},
                             {"mean_clamped", s.balance->mean_clamped},
                             {"moments_exact", s.balance->moments_exact}};
      steps.push_back(std::move(st));
    }
    groups.push_back(json{{"j", g.index_j},
                          {"poly", poly_to_json(g.poly, json_path,
                                                json_path.stem().string() + "_g" +
                                                    std::to_string(gi))},
                          {"steps", std::move(steps)}});
    ++gi;
  }
  return json{{"n", m.dim_in}, {"k", m.k}, {"groups", std::move(groups)}};
}

inline PpfMixture mixture_from_json(const json& v, const std::filesystem::path& json_path) {
  PpfMixture m;
  m.dim_in = v.at("n").get<int>();
  m.k = v.at("k").get<int>();
  for (const auto& gj : v.at("groups")) {
    PpfMixture::Group g{poly_from_json(gj.at("poly"), json_path), gj.at("j").get<int>(), {}};
    for (const auto& st : gj.at("steps")) {
      PpfMixture::Step s;
      s.weight = st.at("w").get<double>();
      s.scale = st.at("scale").get<double>();
      s.shift = st.at("shift").get<double>();
      if (st.contains("balance")) {
        const json& b = st.at("balance");
        s.balance = BalanceTag{b.at("d").get<int>(), b.at("delta").get<double>(),
                               b.at("mean_clamped").get<bool>(), b.at("moments_exact").get<bool>()};
      }
      g.steps.push_back(std::move(s));
    }
    m.groups.push_back(std::move(g));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Joint tables (JSON + CSV with stderr companions)

inline json to_json(const JointTable& t) {
  json entries = json::array(), errs = json::array();
  for (int i = 0; i < t.k; ++i) {
    json row = json::array(), erow = json::array();
    for (int j = 0; j < t.k; ++j) {
      row.push_back(t.at(i, j));
      erow.push_back(t.se(i, j));
    }
    entries.push_back(std::move(row));
    errs.push_back(std::move(erow));
  }
  return json{{"k", t.k}, {"samples", t.samples}, {"entries", std::move(entries)},
              {"stderr", std::move(errs)}};
}

inline JointTable table_from_json(const json& v) {
  JointTable t;
  t.k = v.at("k").get<int>();
  t.samples = v.at("samples").get<std::uint64_t>();
  for (const auto& row : v.at("entries"))
    for (const auto& x : row) t.entries.push_back(x.get<double>());
  for (const auto& row : v.at("stderr"))
    for (const auto& x : row) t.stderrs.push_back(x.get<double>());
  return t;
}

inline std::string table_to_csv(const JointTable& t) {
  std::string out = "i,j,value,stderr\n";
  char buf[96];
  for (int i = 0; i < t.k; ++i)
    for (int j = 0; j < t.k; ++j) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", i, j, t.at(i, j), t.se(i, j));
      out += buf;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Finite joints: {"mass": [[...], ...]}

inline json to_json(const FiniteJoint& p) {
  json rows = json::array();
  for (int i = 0; i < p.rows; ++i) {
    json row = json::array();
    for (int j = 0; j < p.cols; ++j) row.push_back(p.at(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"mass", std::move(rows)}};
}

inline FiniteJoint joint_from_json(const json& v) {
  FiniteJoint p;
  const json& rows = v.at("mass");
  p.rows = static_cast<int>(rows.size());
  require(p.rows > 0, errc::invalid_input, "FiniteJoint: empty mass");
  p.cols = static_cast<int>(rows[0].size());
  for (const auto& row : rows) {
    require(static_cast<int>(row.size()) == p.cols, errc::invalid_input,
            "FiniteJoint: ragged mass matrix");
    for (const auto& x : row) p.mass.push_back(x.get<double>());
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Boost traces and results

inline std::string trace_to_csv(const std::vector<BoostTracePoint>& trace) {
  std::string out = "t,rho_sq,psi\n";
  char buf[96];
  for (const auto& p : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", p.t, p.rho_sq, p.psi);
    out += buf;
  }
  return out;
}

inline json boost_result_to_json(const BoostMatchResult& r) {
  return json{{"projected_poly", to_json(r.alpha)},
              {"iterations", r.details.iterations},
              {"final_mismatch", r.details.final_mismatch},
              {"kappa_sq_norm", r.details.kappa_sq_norm}};
}

/// Reusable PROJECTED_POLY spec from a boost result file.
inline VectorFunction projected_poly_from_json(const json& v) {
  return VectorFunction::projected_poly(expansion_from_json(v.at("projected_poly")));
}

// ---------------------------------------------------------------------------
// Feasibility verdicts

inline json to_json(const DecisionK2& d) {
  json out{{"verdict", d.feasible ? "FEASIBLE" : "INFEASIBLE"},
           {"corr_min", d.corr_min},
           {"corr_max", d.corr_max},
           {"rho_negated", d.rho_negated}};
  if (d.feasible) {
    json strategy{{"f", json{{"type", "threshold"}, {"kappa", d.f_threshold}}}};
    if (d.g_eta)
      strategy["g"] = json{{"type", "interval"}, {"a", d.g_eta->a}, {"b", d.g_eta->b}};
    out["strategy"] = std::move(strategy);
  } else {
    out["violated"] = d.violated;
    out["gap"] = d.gap;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Smoothing reports

inline json to_json(const SmoothingReport& r) {
  return json{{"k", r.k},
              {"d0", r.d0},
              {"m", r.m},
              {"eta", r.eta},
              {"t", r.t},
              {"delta", r.delta},
              {"samples", r.samples},
              {"orthant_ok", r.orthant_ok},
              {"linf_ok", r.linf_ok},
              {"delta_region_prob", json{{"f", r.delta_region_prob_f},
                                         {"f_se", r.delta_region_prob_f_se},
                                         {"g", r.delta_region_prob_g},
                                         {"g_se", r.delta_region_prob_g_se}}},
              {"mean_drift", json{{"f", r.mean_drift_f},
                                  {"f_se", r.mean_drift_f_se},
                                  {"g", r.mean_drift_g},
                                  {"g_se", r.mean_drift_g_se}}},
              {"corr_drift", r.corr_drift},
              {"corr_drift_se", r.corr_drift_se},
              {"ppf_count", r.ppf_count},
              {"ppf_degree", r.ppf_degree},
              {"violations", r.violations}};
}

// ---------------------------------------------------------------------------
// Function specs for CLI inputs

inline VectorFunction function_from_json(const json& v,
                                         const std::filesystem::path& json_path = {}) {
  std::string type = v.at("type").get<std::string>();
  if (type == "constant_vertex") {
    int k = v.at("k").get<int>();
    int idx = v.at("index").get<int>();
    int n = v.value("n", 1);
    return vertex_function(n, k, [idx](std::span<const double>) { return idx; });
  }
  if (type == "halfspace_split") {
    int n = v.value("n", 1);
    int coord = v.value("coord", 0);
    double thr = v.value("threshold", 0.0);
    require(coord >= 0 && coord < n, errc::invalid_input, "halfspace_split: bad coord");
    return vertex_function(n, 2, [coord, thr](std::span<const double> x) {
      return x[coord] > thr ? 0 : 1;
    });
  }
  if (type == "interval_split") {
    int n = v.value("n", 1);
    int coord = v.value("coord", 0);
    double a = v.at("a").get<double>(), b = v.at("b").get<double>();
    return vertex_function(n, 2, [coord, a, b](std::span<const double> x) {
      return (x[coord] > a && x[coord] <= b) ? 0 : 1;
    });
  }
  if (type == "vertex_argmax") {
    std::vector<HermiteExpansion> polys;
    for (const auto& pj : v.at("polys")) polys.push_back(expansion_from_json(pj));
    require(!polys.empty(), errc::invalid_input, "vertex_argmax: no polynomials");
    int n = polys[0].dim_in();
    int k = static_cast<int>(polys.size());
    auto shared = std::make_shared<std::vector<HermiteExpansion>>(std::move(polys));
    return vertex_function(n, k, [shared](std::span<const double> x) {
      int best = 0;
      double bv = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < shared->size(); ++j) {
        double out;
        (*shared)[j].eval(x, std::span<double>(&out, 1));
        if (out > bv) {
          bv = out;
          best = static_cast<int>(j);
        }
      }
      return best;
    });
  }
  if (type == "truncated_series")
    return VectorFunction::truncated_series(expansion_from_json(v.at("expansion")));
  if (type == "projected_poly")
    return VectorFunction::projected_poly(expansion_from_json(v.at("expansion")));
  if (type == "ppf_mixture")
    return VectorFunction::ppf_mixture(mixture_from_json(v, json_path));
  fail(errc::invalid_input, "unknown function type: " + type);
}

}  // namespace gnisim
