// gpattr: anomaly attribution for black-box regression models.
#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>

#include "gpattr/engine.hpp"
#include "gpattr/oracle.hpp"

namespace fs = std::filesystem;
using namespace gpattr;
using nlohmann::json;

namespace {

struct common_opts {
  std::string data;
  std::string model = "sinusoidal2d";
  std::string model_cmd;
  std::string model_url;
  std::string standardize = "test";
  std::uint64_t seed = 0;
  std::string out = "gpattr_out";
  double timeout = 30.0;
};

struct hyper_opts {
  std::optional<double> eta, nu, kappa, a0, b0;
  std::optional<int> n_virtual;
  double cb = 10.0;
  std::string b_mode = "constant";
  double w0 = 0.0, eta0 = 1.0;
  int max_iter = 10000;
  double tol = 1e-6;
  int grid_points = 100;
  double delta_max_factor = 1.1;
  std::string gradient = "mc";
  double eta1 = 1.0;
  int mc_samples = 10;
  double lime_std = 0.3;
  int lime_samples = 1000;
  double lime_nu = 0.0;
  double baylime_eta = 0.1, baylime_lambda = 1.0;
  double lc_lambda = 1.0;
  int sv_configs = 100;
  int ig_intervals = 100;
  std::string baseline;
  std::string ref;
};

struct selection_opts {
  std::size_t point_index = 0;
  std::string indices;
  bool collective = false;
};

void add_common(CLI::App* app, common_opts& c) {
  app->add_option("--data", c.data, "CSV with a header row; last column is the target")->required();
  app->add_option("--model", c.model, "builtin model: sinusoidal2d | linear:c1,c2,... | quadratic:A[|b]")
      ->envname("GPATTR_MODEL");
  app->add_option("--model-cmd", c.model_cmd, "command speaking newline-delimited JSON on stdin/stdout");
  app->add_option("--model-url", c.model_url, "HTTP endpoint base URL (POST /predict)");
  app->add_option("--standardize", c.standardize, "test | none | stats.json with {\"mean\":[...],\"std\":[...]}");
  app->add_option("--seed", c.seed, "seed for every random stream");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--timeout", c.timeout, "seconds to wait for an external model");
}

void add_hyper(CLI::App* app, hyper_opts& h, bool with_baselines) {
  app->add_option("--eta", h.eta, "l2 strength (default 0.1 * N)");
  app->add_option("--nu", h.nu, "relative l1 strength in (0, 1] (default 0.5)");
  app->add_option("--kappa", h.kappa, "learning rate (default 0.1 / N)");
  app->add_option("--a0", h.a0, "gamma shape (default 5.5)");
  app->add_option("--n-virtual", h.n_virtual, "virtual sample size; sets a0 = (n + 1) / 2");
  app->add_option("--b0", h.b0, "constant gamma rate (default a0 * sigma_yf^2 / c_b)");
  app->add_option("--cb", h.cb, "virtual-sample correction c_b");
  app->add_option("--b-mode", h.b_mode, "constant | local")->check(CLI::IsMember({"constant", "local"}));
  app->add_option("--w0", h.w0, "kernel floor weight (local rate mode)");
  app->add_option("--eta0", h.eta0, "kernel width (local rate mode)");
  app->add_option("--max-iter", h.max_iter);
  app->add_option("--tol", h.tol);
  app->add_option("--grid-points", h.grid_points);
  app->add_option("--delta-max-factor", h.delta_max_factor);
  app->add_option("--gradient", h.gradient, "mc | analytic")->check(CLI::IsMember({"mc", "analytic"}));
  app->add_option("--eta1", h.eta1, "perturbation std of the gradient estimator");
  app->add_option("--mc-samples", h.mc_samples);
  if (!with_baselines) return;
  app->add_option("--lime-std", h.lime_std);
  app->add_option("--lime-samples", h.lime_samples);
  app->add_option("--lime-nu", h.lime_nu);
  app->add_option("--baylime-eta", h.baylime_eta);
  app->add_option("--baylime-lambda", h.baylime_lambda);
  app->add_option("--lc-lambda", h.lc_lambda);
  app->add_option("--sv-configs", h.sv_configs);
  app->add_option("--ig-intervals", h.ig_intervals);
  app->add_option("--baseline", h.baseline, "IG baseline x0, comma separated");
  app->add_option("--ref", h.ref, "reference CSV for eig, sv and zscore");
}

void add_selection(CLI::App* app, selection_opts& s) {
  app->add_option("--point-index", s.point_index, "row to attribute (0-based)");
  app->add_option("--indices", s.indices, "rows for collective attribution, e.g. 1,5,9");
  app->add_flag("--collective", s.collective, "one shared perturbation for all --indices");
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct workspace {
  test_set raw;
  test_set data;  // standardized (or raw when --standardize none)
  std::unique_ptr<model> base;
  std::unique_ptr<standardized_model> scaled;
  const model* m = nullptr;
};

workspace open_workspace(const common_opts& c) {
  workspace w;
  w.raw = load_csv(c.data);
  if (w.raw.samples.empty()) throw config_error("dataset '" + c.data + "' has no rows");
  const std::size_t dim = w.raw.dimension();
  if (!c.model_cmd.empty()) {
    w.base = std::make_unique<subprocess_model>(dim, c.model_cmd, c.timeout);
  } else if (!c.model_url.empty()) {
    w.base = std::make_unique<http_model>(dim, c.model_url, c.timeout);
  } else {
    w.base = make_builtin(parse_builtin_spec(c.model));
    if (w.base->dimension() != dim)
      throw config_error("model '" + c.model + "' takes " + std::to_string(w.base->dimension()) +
                         " inputs but the dataset has " + std::to_string(dim) + " features");
  }

  if (c.standardize == "none") {
    w.data = w.raw;
  } else if (c.standardize == "test") {
    if (w.raw.size() < 2) {
      std::cerr << "warning: fewer than two rows; attributing in raw units (no standardization)\n";
      w.data = w.raw;
    } else {
      std::cerr << "warning: standardization statistics estimated from the test data itself\n";
      w.data = standardize(w.raw, std::nullopt);
    }
  } else {
    std::ifstream in(c.standardize);
    if (!in) throw config_error("cannot open statistics file '" + c.standardize + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw config_error("cannot parse '" + c.standardize + "': " + e.what());
    }
    variable_stats st{j.at("mean").get<vec>(), j.at("std").get<vec>()};
    w.data = standardize(w.raw, st);
  }
  if (w.data.stats.provenance != stats_provenance::none) {
    w.scaled = std::make_unique<standardized_model>(*w.base, w.data.stats.mean, w.data.stats.scale);
    w.m = w.scaled.get();
  } else {
    w.m = w.base.get();
  }
  return w;
}

vec to_model_units(const workspace& w, const vec& raw_x) {
  if (w.data.stats.provenance == stats_provenance::none) return raw_x;
  vec z(raw_x.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (raw_x[i] - w.data.stats.mean[i]) / w.data.stats.scale[i];
  return z;
}

const char* provenance_name(stats_provenance p) {
  switch (p) {
    case stats_provenance::user_supplied: return "user_supplied";
    case stats_provenance::test_set_estimated: return "test_set_estimated";
    default: return "none";
  }
}

method_settings build_settings(const workspace& w, const common_opts& c, const hyper_opts& h, std::size_t n_test) {
  method_settings s;
  gpa_hyperparams hp = gpa_hyperparams::defaults_for(n_test);
  if (h.eta) hp.eta = *h.eta;
  if (h.nu) hp.nu = *h.nu;
  if (h.kappa) hp.kappa = *h.kappa;
  if (h.n_virtual) hp.a0 = select_gamma_shape(*h.n_virtual);
  if (h.a0) hp.a0 = *h.a0;
  hp.b0 = h.b0;
  hp.c_b = h.cb;
  hp.b_mode = h.b_mode == "local" ? rate_mode::local_kernel : rate_mode::constant;
  hp.kernel = {h.w0, h.eta0};
  hp.max_iter = h.max_iter;
  hp.tol = h.tol;
  hp.grid_points = h.grid_points;
  hp.delta_max_factor = h.delta_max_factor;
  hp.init_seed = c.seed;
  hp.validate();
  s.gpa = hp;

  gradient_estimator_config g{h.eta1, h.mc_samples, c.seed};
  g.validate();
  s.grad = h.gradient == "analytic" ? gradient_source::closed_form() : gradient_source::monte_carlo(g);
  s.lime.n_samples = h.lime_samples;
  s.lime.sampling_std = h.lime_std;
  s.lime.l1_strength = h.lime_nu;
  s.lime.seed = c.seed;
  s.baylime_eta = h.baylime_eta;
  s.baylime_lambda = h.baylime_lambda;
  s.lc_lambda = h.lc_lambda;
  s.sv.n_configs = h.sv_configs;
  s.sv.seed = c.seed;
  s.ig_intervals = h.ig_intervals;
  const std::size_t dim = w.m->dimension();
  if (!h.baseline.empty()) {
    const vec b = parse_number_list(h.baseline);
    if (b.size() != dim) throw config_error("--baseline needs " + std::to_string(dim) + " values");
    s.ig_baseline = to_model_units(w, b);
  }
  if (!h.ref.empty()) {
    reference_set ref;
    for (const auto& r : load_reference_csv(h.ref, dim)) ref.samples.push_back(to_model_units(w, r));
    s.ref = std::move(ref);
  }
  return s;
}

json config_echo(const workspace& w, const common_opts& c, const method_settings& s, const std::vector<std::string>& methods,
                 const std::vector<std::size_t>& rows) {
  const auto& hp = *s.gpa;
  json j = {{"data", c.data},
            {"model", !c.model_cmd.empty() ? "cmd:" + c.model_cmd : !c.model_url.empty() ? "url:" + c.model_url : c.model},
            {"methods", methods},
            {"rows", rows},
            {"seed", c.seed},
            {"variables", w.data.variable_names},
            {"standardization", {{"provenance", provenance_name(w.data.stats.provenance)},
                                 {"mean", w.data.stats.mean},
                                 {"std", w.data.stats.scale}}},
            {"gpa", {{"eta", hp.eta}, {"nu", hp.nu}, {"kappa", hp.kappa}, {"a0", hp.a0}, {"c_b", hp.c_b},
                     {"b_mode", hp.b_mode == rate_mode::local_kernel ? "local" : "constant"},
                     {"max_iter", hp.max_iter}, {"tol", hp.tol}, {"grid_points", hp.grid_points},
                     {"delta_max_factor", hp.delta_max_factor}}},
            {"gradient", s.grad.analytic ? json{{"kind", "analytic"}}
                                         : json{{"kind", "mc"}, {"eta1", s.grad.mc.perturbation_std},
                                                {"mc_samples", s.grad.mc.mc_samples}}}};
  if (hp.b0) j["gpa"]["b0"] = *hp.b0;
  return j;
}

double residual_variance(const workspace& w) {
  double s = 0.0;
  for (const auto& p : w.data.samples) {
    const double r = p.y - w.m->evaluate(p.x);
    s += r * r;
  }
  return std::max(s / static_cast<double>(w.data.size()), 1e-12);
}

std::vector<std::size_t> selected_rows(const selection_opts& sel, std::size_t n) {
  std::vector<std::size_t> rows;
  if (sel.collective) {
    if (sel.indices.empty()) throw config_error("--collective needs --indices");
    for (double v : parse_number_list(sel.indices)) {
      if (v < 0 || v != std::floor(v)) throw config_error("--indices must be nonnegative integers");
      rows.push_back(static_cast<std::size_t>(v));
    }
  } else {
    if (!sel.indices.empty()) throw config_error("--indices is only used with --collective; use --point-index");
    rows.push_back(sel.point_index);
  }
  for (auto r : rows)
    if (r >= n) throw config_error("row " + std::to_string(r) + " is out of range (dataset has " + std::to_string(n) + " rows)");
  return rows;
}

test_set subset(const test_set& ts, const std::vector<std::size_t>& rows) {
  test_set out = ts;
  out.samples.clear();
  for (auto r : rows) out.samples.push_back(ts.samples[r]);
  return out;
}

void attach_raw(method_output& o, const workspace& w) {
  if (w.data.stats.provenance == stats_provenance::none) return;
  if (o.name == "gpa" || o.name == "lc") {
    o.raw_scores = delta_to_raw(w.data, o.scores);
  } else if (o.name == "lime" || o.name == "lime0") {
    vec r(o.scores.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = o.scores[i] / w.data.stats.scale[i];
    o.raw_scores = r;
  }
}

std::vector<method_output> run_all(const workspace& w, const std::vector<std::string>& methods, const test_set& chosen,
                                   const method_settings& s, bool collective) {
  std::vector<method_output> outs;
  for (const auto& name : methods) {
    if (collective && name != "gpa") throw config_error("method '" + name + "' has no collective form; only gpa does");
    auto o = run_method(name, *w.m, chosen, s);
    attach_raw(o, w);
    outs.push_back(std::move(o));
  }
  return outs;
}

std::vector<std::string> checked_methods(const std::string& list) {
  auto methods = split_names(list);
  if (methods.empty()) throw config_error("--methods is empty");
  for (const auto& m : methods)
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
      throw config_error("unknown method '" + m + "'");
  return methods;
}

json anomaly_json(const workspace& w, const std::vector<std::size_t>& rows, double v) {
  json a = json::array();
  for (auto r : rows) {
    const auto& p = w.data.samples[r];
    a.push_back({{"index", r}, {"score", anomaly(*w.m, p.x, p.y, v).value}});
  }
  return a;
}

int cmd_detect(const common_opts& c, std::optional<double> noise_var, std::size_t top) {
  workspace w = open_workspace(c);
  const double v = noise_var ? *noise_var : residual_variance(w);
  if (!(v > 0.0)) throw config_error("--noise-var must be positive");
  std::vector<std::pair<std::size_t, double>> scores;
  for (std::size_t i = 0; i < w.data.size(); ++i)
    scores.emplace_back(i, anomaly(*w.m, w.data.samples[i].x, w.data.samples[i].y, v).value);
  std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (top == 0 || top > scores.size()) throw config_error("--top must be between 1 and the number of rows");

  json all = json::array(), picked = json::array();
  for (const auto& [i, s] : scores) all.push_back({{"index", i}, {"score", s}});
  for (std::size_t k = 0; k < top; ++k) picked.push_back(scores[k].first);
  double mean = 0.0;
  for (const auto& p : scores) mean += p.second / static_cast<double>(scores.size());
  json doc = {{"schema_version", schema_version},
              {"noise_variance", v},
              {"noise_variance_source", noise_var ? "user" : "residual_estimate"},
              {"anomaly_scores", all},
              {"collective_score", mean},
              {"top", picked}};
  fs::create_directories(c.out);
  write_text((fs::path(c.out) / "detect.json").string(), dump_stable(doc));
  for (std::size_t k = 0; k < top; ++k) std::cout << scores[k].first << "\t" << scores[k].second << "\n";
  return 0;
}

int cmd_explain(const common_opts& c, const hyper_opts& h, const selection_opts& sel, const std::string& method_list) {
  const auto methods = checked_methods(method_list);
  workspace w = open_workspace(c);
  const auto rows = selected_rows(sel, w.data.size());
  const test_set chosen = subset(w.data, rows);
  const method_settings s = build_settings(w, c, h, chosen.size());
  run_report rep;
  rep.methods = run_all(w, methods, chosen, s, sel.collective);
  rep.config = config_echo(w, c, s, methods, rows);
  rep.anomaly_scores = anomaly_json(w, rows, residual_variance(w));
  rep.diagnostics = {{"collective", sel.collective}, {"model_queries", w.base->query_count()}};
  fs::create_directories(c.out);
  emit_result_json(rep, (fs::path(c.out) / "result.json").string());
  emit_litmus_svg(rep, w.data.variable_names, (fs::path(c.out) / "litmus.svg").string());
  for (const auto& o : rep.methods) {
    std::cout << o.name;
    for (double v : o.scores) std::cout << "\t" << v;
    std::cout << "\n";
  }
  return 0;
}

int cmd_dist(const common_opts& c, const hyper_opts& h, const selection_opts& sel) {
  workspace w = open_workspace(c);
  const auto rows = selected_rows(sel, w.data.size());
  const test_set chosen = subset(w.data, rows);
  const method_settings s = build_settings(w, c, h, chosen.size());
  run_report rep;
  rep.methods = run_all(w, {"gpa"}, chosen, s, sel.collective);
  rep.config = config_echo(w, c, s, {"gpa"}, rows);
  rep.anomaly_scores = anomaly_json(w, rows, residual_variance(w));
  const bool converged = rep.methods.front().details.value("converged", false);
  const bool stalled = rep.methods.front().details.value("stalled", false);
  rep.diagnostics = {{"converged", converged}, {"stalled", stalled}, {"model_queries", w.base->query_count()}};
  if (stalled)
    std::cerr << "warning: solver stopped when the gradient estimate gave no descent; "
                 "distributions computed at the last iterate\n";
  else if (!converged)
    std::cerr << "warning: solver did not converge; distributions computed at the last iterate\n";
  fs::create_directories(c.out);
  emit_result_json(rep, (fs::path(c.out) / "distribution.json").string());
  const auto& g = rep.methods.front();
  emit_distribution_svg(g.distribution, g.scores, w.data.variable_names, (fs::path(c.out) / "distribution.svg").string());
  for (const auto& q : g.distribution) {
    const auto mode = std::max_element(q.probs.begin(), q.probs.end()) - q.probs.begin();
    std::cout << w.data.variable_names[q.variable_index] << "\tmap=" << g.scores[q.variable_index]
              << "\tmode=" << q.grid[mode] << "\n";
  }
  return 0;
}

int cmd_compare(const common_opts& c, const hyper_opts& h, const selection_opts& sel, const std::string& method_list,
                const std::string& reference) {
  const auto methods = checked_methods(method_list);
  if (methods.size() < 2) throw config_error("compare needs at least two methods");
  if (std::find(methods.begin(), methods.end(), reference) == methods.end())
    throw config_error("reference method '" + reference + "' is not in --methods");
  workspace w = open_workspace(c);
  const auto rows = selected_rows(sel, w.data.size());
  const test_set chosen = subset(w.data, rows);
  method_settings s = build_settings(w, c, h, chosen.size());
  s.gpa_distributions = false;
  const auto outs = run_all(w, methods, chosen, s, sel.collective);
  json scores = json::object(), reports = json::object();
  for (const auto& o : outs) scores[o.name] = o.scores;
  const auto cmp = compare_to(outs, reference);
  for (const auto& r : cmp) reports[r.method] = to_json(r.report);
  json doc = {{"schema_version", schema_version},
              {"config", config_echo(w, c, s, methods, rows)},
              {"reference", reference},
              {"scores", scores},
              {"consistency", reports}};
  fs::create_directories(c.out);
  write_text((fs::path(c.out) / "compare.json").string(), dump_stable(doc));
  auto cell = [](const std::optional<double>& v) {
    std::ostringstream s;
    if (v) s << *v;
    else s << "null";
    return s.str();
  };
  std::cout << "method\ttau\trho\tsmr\thit25\n";
  for (const auto& r : cmp)
    std::cout << r.method << "\t" << cell(r.report.kendall_tau) << "\t" << cell(r.report.spearman_rho) << "\t"
              << r.report.smr << "\t" << r.report.hit25 << "\n";
  return 0;
}

oracle::pair as_pair(const std::string& text, const char* flag) {
  const vec v = parse_number_list(text);
  if (v.size() != 2) throw config_error(std::string(flag) + " needs exactly two values");
  return {v[0], v[1]};
}

int cmd_oracle(const std::string& which, const std::string& x, std::optional<double> y, const std::string& x0) {
  const auto xt = as_pair(x, "--x");
  oracle::pair r{};
  if (which == "gpa" || which == "lc") {
    if (!y) throw config_error("oracle " + which + " needs --y");
    r = oracle::gpa(xt, *y);
  } else if (which == "ig") {
    if (x0.empty()) throw config_error("oracle ig needs --x0");
    r = oracle::ig(xt, as_pair(x0, "--x0"));
  } else if (which == "sv") {
    r = oracle::sv(xt);
  } else if (which == "lime0") {
    r = oracle::lime0(xt);
  } else {
    throw config_error("unknown oracle '" + which + "'");
  }
  json doc = {{"method", which}, {"x", {xt[0], xt[1]}}, {"scores", {r[0], r[1]}}};
  if (y) doc["y"] = *y;
  if (!x0.empty()) doc["x0"] = parse_number_list(x0);
  std::cout << dump_stable(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anomaly attribution for black-box regression models"};
  app.require_subcommand(1);

  common_opts c;
  hyper_opts h;
  selection_opts sel;
  std::optional<double> noise_var;
  std::size_t top = 1;
  std::string methods = "gpa";
  std::string reference = "gpa";
  std::string oracle_which, oracle_x, oracle_x0;
  std::optional<double> oracle_y;

  auto* detect = app.add_subcommand("detect", "score samples by negative log-likelihood and list the top outliers");
  add_common(detect, c);
  detect->add_option("--noise-var", noise_var, "Gaussian noise variance (default: mean squared residual)");
  detect->add_option("--top", top, "number of outliers to report");

  auto* explain = app.add_subcommand("explain", "attribute one sample (or a collection) with selected methods");
  add_common(explain, c);
  add_hyper(explain, h, true);
  add_selection(explain, sel);
  explain->add_option("--methods", methods, "comma list of gpa,lc,lime,lime0,baylime,ig,eig,sv,zscore");

  auto* dist = app.add_subcommand("dist", "GPA score distributions per variable");
  add_common(dist, c);
  add_hyper(dist, h, false);
  add_selection(dist, sel);

  auto* compare = app.add_subcommand("compare", "consistency of methods against a reference method");
  add_common(compare, c);
  add_hyper(compare, h, true);
  add_selection(compare, sel);
  compare->add_option("--methods", methods, "comma list, at least two");
  compare->add_option("--reference", reference, "reference method (default gpa)");

  auto* orc = app.add_subcommand("oracle", "closed-form values for the 2D sinusoidal model");
  orc->add_option("which", oracle_which, "gpa | lc | ig | sv | lime0")->required();
  orc->add_option("--x", oracle_x, "test point x1,x2")->required();
  orc->add_option("--y", oracle_y, "observed target (gpa, lc)");
  orc->add_option("--x0", oracle_x0, "IG baseline x1,x2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (detect->parsed()) return cmd_detect(c, noise_var, top);
    if (explain->parsed()) return cmd_explain(c, h, sel, methods);
    if (dist->parsed()) return cmd_dist(c, h, sel);
    if (compare->parsed()) return cmd_compare(c, h, sel, methods, reference);
    if (orc->parsed()) return cmd_oracle(oracle_which, oracle_x, oracle_y, oracle_x0);
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const transport_error& e) {
    std::cerr << "model transport error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
