#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "gnisim/io.hpp"
#include "gnisim/rng.hpp"

using namespace gnisim;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
  fs::path dir = fs::temp_directory_path() / "gnisim_io_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("expansion json round trip preserves coefficients exactly") {
  CounterRng rng(17, 0);
  HermiteExpansion e(2, 3, 3);
  for (const auto& s : multi_indices_up_to(2, 3))
    e.set(s, {rng.next_normal() / 3, rng.next_normal() / 3, rng.next_normal() / 3});
  json j = to_json(e);
  std::string bytes = dump_json_17(j);
  HermiteExpansion back = expansion_from_json(json::parse(bytes));
  CHECK(back.dim_in() == e.dim_in());
  CHECK(back.dim_out() == e.dim_out());
  CHECK(back.coeffs() == e.coeffs());
  // identical value => identical bytes
  CHECK(dump_json_17(to_json(back)) == bytes);
}

TEST_CASE("17-digit formatting round-trips doubles exactly") {
  for (double v : {1.0 / 3, 0.1, 2.0 / 7, 1e-17, 123456.789}) {
    json j = json{{"v", v}};
    json back = json::parse(dump_json_17(j));
    CHECK(back.at("v").get<double>() == v);
  }
}

TEST_CASE("sampler spec round trip") {
  GaussianPairSampler s(0.37, 4, 987654321);
  GaussianPairSampler back = sampler_from_json(json::parse(dump_json_17(to_json(s))));
  CHECK(back.rho() == s.rho());
  CHECK(back.dim() == s.dim());
  CHECK(back.seed() == s.seed());
}

TEST_CASE("finite joint and table serialization") {
  FiniteJoint p{2, 2, {0.45, 0.05, 0.05, 0.45}};
  FiniteJoint back = joint_from_json(json::parse(dump_json_17(to_json(p))));
  CHECK(back.mass == p.mass);

  JointTable t;
  t.k = 2;
  t.samples = 1000;
  t.entries = {0.4, 0.1, 0.1, 0.4};
  t.stderrs = {0.01, 0.005, 0.005, 0.01};
  JointTable tb = table_from_json(json::parse(dump_json_17(to_json(t))));
  CHECK(tb.entries == t.entries);
  CHECK(tb.stderrs == t.stderrs);
  std::string csv = table_to_csv(t);
  CHECK(csv.find("i,j,value,stderr") == 0);
  CHECK(csv.find("0,1,") != std::string::npos);
}

TEST_CASE("bernstein sidecar round trip") {
  fs::path dir = test_dir();
  auto f = [](std::span<const double> u) { return u[0] * u[0] + 0.5 * u[1]; };
  BernsteinApprox a = bp_fit(f, {6, 5});
  json j = bernstein_to_json(a, dir / "bern.json", "bern.f64");
  write_json_17(dir / "bern.json", j);
  BernsteinApprox back = bernstein_from_json(read_json(dir / "bern.json"), dir / "bern.json");
  CHECK(back.degrees() == a.degrees());
  CHECK(back.values() == a.values());
  std::vector<double> u{0.3, 0.8};
  CHECK(back.eval(u) == a.eval(u));
}

TEST_CASE("mixture with composed polynomials round-trips through files") {
  VectorFunction f = vertex_function(1, 2, [](std::span<const double> x) {
    return x[0] > 0 ? 0 : 1;
  });
  SmoothOptions opts;
  opts.report_samples = 2000;
  opts.quantile_samples = 5000;
  opts.check_samples = 2000;
  SmoothOneResult one = smooth_one(f, std::log(2.0), 0.25, 5, opts);

  fs::path dir = test_dir();
  fs::path path = dir / "mix.json";
  json j = mixture_to_json(one.mixture, path);
  j["type"] = "ppf_mixture";
  write_json_17(path, j);
  VectorFunction back = function_from_json(read_json(path), path);
  REQUIRE(back.form() == VectorFunction::Form::kPpfMixture);

  std::vector<double> x(1), a(2), b(2);
  for (int i = 0; i < 200; ++i) {
    gaussian_vector(321, 0, i, x);
    VectorFunction::ppf_mixture(one.mixture).eval(x, a);
    back.eval(x, b);
    CHECK(a == b);
  }
}

TEST_CASE("boost result file rebuilds a projected polynomial") {
  VectorFunction f = vertex_function(1, 2, [](std::span<const double> x) {
    return x[0] > 0 ? 0 : 1;
  });
  BoostMatchResult res = boost_match(f, 3, 0.05);
  json j = boost_result_to_json(res);
  VectorFunction back = projected_poly_from_json(json::parse(dump_json_17(j)));
  std::vector<double> x(1), a(2), b(2);
  for (int i = 0; i < 100; ++i) {
    gaussian_vector(9, 0, i, x);
    res.f_proj.eval(x, a);
    back.eval(x, b);
    CHECK(a == b);
  }
  std::string csv = trace_to_csv(res.details.trace);
  CHECK(csv.find("t,rho_sq,psi") == 0);
}

TEST_CASE("function specs parse") {
  json half{{"type", "halfspace_split"}, {"n", 1}, {"coord", 0}, {"threshold", 0.25}};
  VectorFunction f = function_from_json(half);
  std::vector<double> above{0.5}, below{0.0};
  CHECK(f(above) == std::vector<double>{1.0, 0.0});
  CHECK(f(below) == std::vector<double>{0.0, 1.0});

  json cv{{"type", "constant_vertex"}, {"k", 3}, {"index", 2}, {"n", 2}};
  VectorFunction c = function_from_json(cv);
  std::vector<double> x{0.0, 0.0};
  CHECK(c(x) == std::vector<double>{0.0, 0.0, 1.0});

  json iv{{"type", "interval_split"}, {"n", 1}, {"a", -1.0}, {"b", 1.0}};
  VectorFunction g = function_from_json(iv);
  std::vector<double> inside{0.0}, outside{2.0};
  CHECK(g(inside) == std::vector<double>{1.0, 0.0});
  CHECK(g(outside) == std::vector<double>{0.0, 1.0});

  CHECK_THROWS_AS(function_from_json(json{{"type", "nope"}}), error);
}

TEST_CASE("verdict and report json are well formed") {
  DecisionK2 d = decide_k2(0.5, BinaryTarget{0.5, 0.5, 0.6}, 1e-6);
  json j = to_json(d);
  CHECK(j.at("verdict") == "FEASIBLE");
  CHECK(j.contains("strategy"));
  DecisionK2 no = decide_k2(0.5, BinaryTarget{0.5, 0.5, 0.95}, 1e-6);
  json jn = to_json(no);
  CHECK(jn.at("verdict") == "INFEASIBLE");
  CHECK(jn.at("violated") == "max");
}
