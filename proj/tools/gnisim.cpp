// gnisim: command-line front end for the Gaussian noise-stability toolkit.
// Subcommands: expand, boost, smooth, decide-k2, maxcorr, table.
// Config may come from flags or a single JSON file (flags win). Exit codes:
// 0 success, 2 validation/usage error, 3 domain outcome ("ran fine, answer
// is no": INFEASIBLE or a smoothing report violation).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "gnisim/expand.hpp"
#include "gnisim/io.hpp"

namespace fs = std::filesystem;
using gnisim::json;

namespace {

struct CommonArgs {
  std::optional<std::string> config;
  std::optional<unsigned> threads;
};

unsigned resolve_cli_threads(const CommonArgs& common) {
  if (common.threads) return *common.threads;
  if (const char* env = std::getenv("GAUSS_NISIM_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 0;  // library default: available parallelism
}

json load_config(const CommonArgs& common) {
  if (!common.config) return json::object();
  return gnisim::read_json(*common.config);
}

template <typename T>
void fill(std::optional<T>& slot, const json& cfg, const std::string& key) {
  if (!slot && cfg.contains(key)) slot = cfg.at(key).get<T>();
}

template <typename T>
T need(const std::optional<T>& slot, const std::string& key) {
  if (!slot) gnisim::fail(gnisim::errc::invalid_input, "missing required option: " + key);
  return *slot;
}

/// Exactly one of rho / t; e^{-t} = rho links them.
double resolve_t(const std::optional<double>& rho, const std::optional<double>& t) {
  if (rho && t) gnisim::fail(gnisim::errc::invalid_input, "supply exactly one of rho or t");
  if (t) {
    gnisim::require(*t >= 0.0, gnisim::errc::negative_time, "t < 0");
    return *t;
  }
  if (rho) {
    gnisim::require(*rho > 0.0 && *rho <= 1.0, gnisim::errc::invalid_rho,
                    "rho must be in (0,1] to define t = -log(rho)");
    return -std::log(*rho);
  }
  gnisim::fail(gnisim::errc::invalid_input, "supply one of rho or t");
}

gnisim::VectorFunction load_function(const std::string& path) {
  return gnisim::function_from_json(gnisim::read_json(path), fs::path(path));
}

void emit(const std::optional<std::string>& out, const json& v) {
  if (out)
    gnisim::write_json_17(*out, v);
  else
    std::cout << gnisim::dump_json_17(v);
}

int cmd_expand(const CommonArgs& common, std::optional<std::string> fn_path,
               std::optional<int> degree, std::optional<std::string> method,
               std::optional<std::uint64_t> samples, std::optional<std::uint64_t> seed,
               std::optional<std::string> out) {
  json cfg = load_config(common);
  fill(fn_path, cfg, "fn");
  fill(degree, cfg, "degree");
  fill(method, cfg, "method");
  fill(samples, cfg, "samples");
  fill(seed, cfg, "seed");
  fill(out, cfg, "out");

  gnisim::VectorFunction f = load_function(need(fn_path, "fn"));
  int d = need(degree, "degree");
  std::string meth = method.value_or("quadrature");
  gnisim::ExpandMethod em;
  if (meth == "quadrature") {
    em = gnisim::ExpandMethod::quadrature();
  } else if (meth == "mc") {
    em = gnisim::ExpandMethod::monte_carlo(need(samples, "samples"), need(seed, "seed"));
    std::cout << gnisim::dump_json_17(
        json{{"resolved_seed", *seed}, {"stream", "expand/mc"}, {"samples", *samples}});
  } else {
    gnisim::fail(gnisim::errc::invalid_input, "method must be quadrature or mc");
  }
  emit(out, gnisim::to_json(gnisim::expand(f, d, em)));
  return 0;
}

int cmd_boost(const CommonArgs& common, std::optional<std::string> fn_path,
              std::optional<int> degree, std::optional<double> delta,
              std::optional<std::uint64_t> mc_measure, std::optional<std::uint64_t> seed,
              std::optional<std::string> out, std::optional<std::string> trace) {
  json cfg = load_config(common);
  fill(fn_path, cfg, "fn");
  fill(degree, cfg, "degree");
  fill(delta, cfg, "delta");
  fill(mc_measure, cfg, "mc_measure");
  fill(seed, cfg, "seed");
  fill(out, cfg, "out");
  fill(trace, cfg, "trace");

  gnisim::VectorFunction f = load_function(need(fn_path, "fn"));
  std::optional<gnisim::DiscreteMeasure> measure;
  if (mc_measure) {
    measure = gnisim::monte_carlo_measure(f.dim_in(), *mc_measure, need(seed, "seed"));
    std::cout << gnisim::dump_json_17(
        json{{"resolved_seed", *seed}, {"stream", "boost/measure"}, {"samples", *mc_measure}});
  }
  gnisim::BoostMatchResult res =
      gnisim::boost_match(f, need(degree, "degree"), need(delta, "delta"), std::move(measure));
  emit(out, gnisim::boost_result_to_json(res));
  if (trace) {
    std::ofstream os(*trace);
    gnisim::require(os.good(), gnisim::errc::io_error, "cannot open trace file");
    os << gnisim::trace_to_csv(res.details.trace);
  }
  return 0;
}

int cmd_smooth(const CommonArgs& common, std::optional<std::string> f_path,
               std::optional<std::string> g_path, std::optional<double> rho,
               std::optional<double> t, std::optional<double> delta,
               std::optional<std::uint64_t> seed, std::optional<std::uint64_t> samples,
               std::optional<std::string> out_dir) {
  json cfg = load_config(common);
  fill(f_path, cfg, "f");
  fill(g_path, cfg, "g");
  fill(rho, cfg, "rho");
  fill(t, cfg, "t");
  fill(delta, cfg, "delta");
  fill(seed, cfg, "seed");
  fill(samples, cfg, "samples");
  fill(out_dir, cfg, "out_dir");

  gnisim::VectorFunction f = load_function(need(f_path, "f"));
  gnisim::VectorFunction g = load_function(need(g_path, "g"));
  double tt = resolve_t(rho, t);
  gnisim::SmoothOptions opts;
  opts.threads = resolve_cli_threads(common);
  if (samples) opts.report_samples = *samples;
  std::uint64_t sd = need(seed, "seed");
  std::cout << gnisim::dump_json_17(json{{"resolved_seed", sd},
                                         {"streams", json{{"f", "seed/0x66"},
                                                          {"g", "seed/0x67"},
                                                          {"report", "seed/0x726570"}}},
                                         {"samples", opts.report_samples}});
  gnisim::SmoothResult res = gnisim::smooth(f, g, tt, need(delta, "delta"), sd, opts);

  fs::path dir = out_dir ? fs::path(*out_dir) : fs::path(".");
  fs::create_directories(dir);
  json f1j = gnisim::mixture_to_json(res.f_side.mixture, dir / "f1.json");
  f1j["type"] = "ppf_mixture";
  gnisim::write_json_17(dir / "f1.json", f1j);
  json g1j = gnisim::mixture_to_json(res.g_side.mixture, dir / "g1.json");
  g1j["type"] = "ppf_mixture";
  gnisim::write_json_17(dir / "g1.json", g1j);
  gnisim::write_json_17(dir / "report.json", gnisim::to_json(res.report));
  std::cout << gnisim::dump_json_17(json{{"report", gnisim::to_json(res.report)}});
  return res.report.violations.empty() ? 0 : 3;
}

int cmd_decide_k2(const CommonArgs& common, std::optional<double> rho, std::optional<double> mu1,
                  std::optional<double> mu2, std::optional<double> eta,
                  std::optional<double> delta, std::optional<std::string> out) {
  json cfg = load_config(common);
  fill(rho, cfg, "rho");
  fill(mu1, cfg, "mu1");
  fill(mu2, cfg, "mu2");
  fill(eta, cfg, "eta");
  fill(delta, cfg, "delta");
  fill(out, cfg, "out");

  gnisim::BinaryTarget target{need(mu1, "mu1"), need(mu2, "mu2"), need(eta, "eta")};
  gnisim::DecisionK2 d = gnisim::decide_k2(need(rho, "rho"), target, delta.value_or(1e-6));
  emit(out, gnisim::to_json(d));
  return d.feasible ? 0 : 3;
}

int cmd_maxcorr(const CommonArgs& common, std::optional<std::string> joint_path,
                std::optional<std::string> out) {
  json cfg = load_config(common);
  fill(joint_path, cfg, "joint");
  fill(out, cfg, "out");
  gnisim::FiniteJoint p = gnisim::joint_from_json(gnisim::read_json(need(joint_path, "joint")));
  gnisim::MaxCorrelation mc = gnisim::max_correlation(p);
  json v{{"rho", mc.rho}, {"degenerate", mc.degenerate}};
  if (out) gnisim::write_json_17(*out, v);
  std::cout << gnisim::dump_json_17(v);
  return 0;
}

int cmd_table(const CommonArgs& common, std::optional<std::string> f_path,
              std::optional<std::string> g_path, std::optional<double> rho,
              std::optional<double> t, std::optional<std::uint64_t> samples,
              std::optional<std::uint64_t> seed, std::optional<std::string> out,
              std::optional<std::string> csv, std::optional<std::string> tv_against) {
  json cfg = load_config(common);
  fill(f_path, cfg, "f");
  fill(g_path, cfg, "g");
  fill(rho, cfg, "rho");
  fill(t, cfg, "t");
  fill(samples, cfg, "samples");
  fill(seed, cfg, "seed");
  fill(out, cfg, "out");
  fill(csv, cfg, "csv");
  fill(tv_against, cfg, "tv_against");

  gnisim::VectorFunction f = load_function(need(f_path, "f"));
  gnisim::VectorFunction g = load_function(need(g_path, "g"));
  double resolved_rho = rho ? *rho : std::exp(-resolve_t(rho, t));
  std::uint64_t sd = need(seed, "seed");
  std::uint64_t n = samples.value_or(1000000);
  std::cout << gnisim::dump_json_17(
      json{{"resolved_seed", sd}, {"stream", "table/pairs"}, {"samples", n}});
  gnisim::JointTable table =
      gnisim::estimate_table(f, g, resolved_rho, n, sd, resolve_cli_threads(common));
  json v = gnisim::to_json(table);
  if (tv_against) {
    gnisim::JointTable other = gnisim::table_from_json(gnisim::read_json(*tv_against));
    v["tv_distance"] = gnisim::tv_distance(table, other);
  }
  emit(out, v);
  if (csv) {
    std::ofstream os(*csv);
    gnisim::require(os.good(), gnisim::errc::io_error, "cannot open csv file");
    os << gnisim::table_to_csv(table);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hermite-spectral analysis, spectrum-matching projection, and"
               " feasibility tools over correlated Gaussian space"};
  app.require_subcommand(1);

  CommonArgs common;
  app.add_option("--config", common.config, "JSON config file (flags win)");
  app.add_option("--threads", common.threads, "worker threads (env GAUSS_NISIM_THREADS)");

  // expand
  std::optional<std::string> e_fn, e_method, e_out;
  std::optional<int> e_degree;
  std::optional<std::uint64_t> e_samples, e_seed;
  CLI::App* expand = app.add_subcommand("expand", "Hermite coefficients of a function");
  expand->add_option("--fn", e_fn, "function spec JSON");
  expand->add_option("--degree", e_degree, "max |S|");
  expand->add_option("--method", e_method, "quadrature | mc");
  expand->add_option("--samples", e_samples, "MC sample count");
  expand->add_option("--seed", e_seed, "MC seed");
  expand->add_option("--out", e_out, "output JSON path (stdout if omitted)");

  // boost
  std::optional<std::string> b_fn, b_out, b_trace;
  std::optional<int> b_degree;
  std::optional<double> b_delta;
  std::optional<std::uint64_t> b_mc, b_seed;
  CLI::App* boost = app.add_subcommand("boost", "spectrum-matching projection iteration");
  boost->add_option("--fn", b_fn, "simplex-valued function spec JSON");
  boost->add_option("--degree", b_degree, "Hermite basis degree");
  boost->add_option("--delta", b_delta, "target spectral mismatch");
  boost->add_option("--mc-measure", b_mc, "use a Monte-Carlo measure of this size");
  boost->add_option("--seed", b_seed, "measure seed (mc only)");
  boost->add_option("--out", b_out, "result JSON path");
  boost->add_option("--trace", b_trace, "trace CSV path");

  // smooth
  std::optional<std::string> s_f, s_g, s_dir;
  std::optional<double> s_rho, s_t, s_delta;
  std::optional<std::uint64_t> s_seed, s_samples;
  CLI::App* smooth = app.add_subcommand("smooth", "full smoothing pipeline with report");
  smooth->add_option("--f", s_f, "first [k]-valued function spec");
  smooth->add_option("--g", s_g, "second [k]-valued function spec");
  smooth->add_option("--rho", s_rho, "pair correlation (exactly one of rho/t)");
  smooth->add_option("--t", s_t, "noise rate (exactly one of rho/t)");
  smooth->add_option("--delta", s_delta, "error parameter");
  smooth->add_option("--seed", s_seed, "pipeline seed");
  smooth->add_option("--samples", s_samples, "report sample count");
  smooth->add_option("--out-dir", s_dir, "output directory");

  // decide-k2
  std::optional<double> d_rho, d_mu1, d_mu2, d_eta, d_delta;
  std::optional<std::string> d_out;
  CLI::App* decide = app.add_subcommand("decide-k2", "binary-target feasibility decision");
  decide->add_option("--rho", d_rho, "source correlation");
  decide->add_option("--mu1", d_mu1, "target mean of U");
  decide->add_option("--mu2", d_mu2, "target mean of V");
  decide->add_option("--eta", d_eta, "target agreement Pr[U=V]");
  decide->add_option("--delta", d_delta, "decision-boundary tolerance");
  decide->add_option("--out", d_out, "verdict JSON path");

  // maxcorr
  std::optional<std::string> m_joint, m_out;
  CLI::App* maxcorr = app.add_subcommand("maxcorr", "maximal correlation of a finite joint");
  maxcorr->add_option("--joint", m_joint, "joint distribution JSON ({\"mass\":[[...]]})");
  maxcorr->add_option("--out", m_out, "output JSON path");

  // table
  std::optional<std::string> t_f, t_g, t_out, t_csv, t_tv;
  std::optional<double> t_rho, t_t;
  std::optional<std::uint64_t> t_samples, t_seed;
  CLI::App* table = app.add_subcommand("table", "Monte-Carlo correlation table");
  table->add_option("--f", t_f, "first function spec");
  table->add_option("--g", t_g, "second function spec");
  table->add_option("--rho", t_rho, "pair correlation (exactly one of rho/t)");
  table->add_option("--t", t_t, "noise rate (exactly one of rho/t)");
  table->add_option("--samples", t_samples, "sample count");
  table->add_option("--seed", t_seed, "pair-stream seed");
  table->add_option("--out", t_out, "table JSON path");
  table->add_option("--csv", t_csv, "table CSV path");
  table->add_option("--tv-against", t_tv, "report TV distance to this table JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << gnisim::dump_json_17(json{{"error", "usage"}, {"detail", e.what()}});
    return 2;
  }

  try {
    if (expand->parsed())
      return cmd_expand(common, e_fn, e_degree, e_method, e_samples, e_seed, e_out);
    if (boost->parsed())
      return cmd_boost(common, b_fn, b_degree, b_delta, b_mc, b_seed, b_out, b_trace);
    if (smooth->parsed())
      return cmd_smooth(common, s_f, s_g, s_rho, s_t, s_delta, s_seed, s_samples, s_dir);
    if (decide->parsed()) return cmd_decide_k2(common, d_rho, d_mu1, d_mu2, d_eta, d_delta, d_out);
    if (maxcorr->parsed()) return cmd_maxcorr(common, m_joint, m_out);
    if (table->parsed())
      return cmd_table(common, t_f, t_g, t_rho, t_t, t_samples, t_seed, t_out, t_csv, t_tv);
  } catch (const gnisim::error& e) {
    std::cerr << gnisim::dump_json_17(
        json{{"error", gnisim::errc_name(e.code())}, {"detail", e.what()}});
    return 2;
  } catch (const std::exception& e) {
    std::cerr << gnisim::dump_json_17(json{{"error", "internal"}, {"detail", e.what()}});
    return 2;
  }
  return 2;
}
