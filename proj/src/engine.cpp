#include "gpattr/engine.hpp"

#include <algorithm>

namespace gpattr {

using nlohmann::json;

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> names{"gpa", "lc", "lime", "lime0", "baylime", "ig", "eig", "sv", "zscore"};
  return names;
}

gpa_hyperparams effective_gpa(const method_settings& s, std::size_t n_test) {
  return s.gpa ? *s.gpa : gpa_hyperparams::defaults_for(n_test);
}

namespace {

const sample& single(const std::string& name, const test_set& ts) {
  if (ts.size() != 1) throw config_error("method '" + name + "' attributes one sample at a time");
  return ts.samples.front();
}

const reference_set& need_ref(const std::string& name, const method_settings& s) {
  if (!s.ref) throw config_error("method '" + name + "' requires a reference set (--ref)");
  return *s.ref;
}

}  // namespace

method_output run_method(const std::string& name, const model& m, const test_set& ts, const method_settings& s) {
  if (std::find(known_methods().begin(), known_methods().end(), name) == known_methods().end())
    throw config_error("unknown method '" + name + "'");
  if (ts.samples.empty()) throw config_error("no samples to attribute");
  method_output out;
  out.name = name;
  const std::uint64_t before = m.query_count();

  if (name == "gpa") {
    const gpa_hyperparams hp = effective_gpa(s, ts.size());
    const auto res = map_estimate(ts, m, hp, s.grad);
    out.scores = res.delta_star;
    out.details = {{"iterations", res.iterations},
                   {"converged", res.converged},
                   {"stalled", res.stalled},
                   {"rates", res.rates},
                   {"final_kappa", res.final_kappa},
                   {"objective", res.objective_trace.back()},
                   {"eta", hp.eta},
                   {"nu", hp.nu},
                   {"kappa", hp.kappa},
                   {"a0", hp.a0}};
    if (s.gpa_distributions) out.distribution = score_distributions(res.delta_star, ts, m, hp, res.rates);
  } else if (name == "lc") {
    const sample& p = single(name, ts);
    const gpa_hyperparams hp = effective_gpa(s, 1);
    lc_config cfg;
    cfg.eta = hp.eta;
    cfg.nu = hp.nu;
    cfg.kappa = hp.kappa;
    cfg.lambda = s.lc_lambda;
    cfg.max_iter = hp.max_iter;
    cfg.tol = hp.tol;
    cfg.init_seed = hp.init_seed;
    const auto res = lc(m, p.x, p.y, cfg, s.grad);
    out.scores = res.delta;
    out.details = {{"iterations", res.iterations}, {"converged", res.converged},
                   {"stalled", res.stalled},
                   {"lambda", cfg.lambda}};
  } else if (name == "lime") {
    const sample& p = single(name, ts);
    const auto res = lime(m, p.x, p.y, s.lime);
    out.scores = res.beta;
    out.details = {{"intercept", res.intercept}};
  } else if (name == "lime0") {
    const sample& p = single(name, ts);
    lime_config cfg = s.lime;
    cfg.l1_strength = 0.0;
    const auto res = lime0(m, p.x, p.y, cfg);
    out.scores = res.beta;
    out.details = {{"intercept", res.intercept}, {"rank_deficient", res.rank_deficient}};
  } else if (name == "baylime") {
    const sample& p = single(name, ts);
    const auto res = baylime_distributions(m, p.x, p.y, s.lime, s.baylime_eta, s.baylime_lambda);
    out.scores = res.mean;
    out.details = {{"variance", res.variance}};
  } else if (name == "ig") {
    const sample& p = single(name, ts);
    if (!s.ig_baseline) throw config_error("method 'ig' requires a baseline (--baseline)");
    out.scores = integrated_gradient(m, p.x, {*s.ig_baseline, s.ig_intervals}, s.grad);
  } else if (name == "eig") {
    const sample& p = single(name, ts);
    out.scores = expected_integrated_gradient(m, p.x, need_ref(name, s), s.ig_intervals, s.grad);
  } else if (name == "sv") {
    const sample& p = single(name, ts);
    const auto& ref = need_ref(name, s);
    out.scores = shapley_sampled(m, p.x, ref, s.sv);
    out.details = {{"exact", shapley_uses_exact(m.dimension(), ref, s.sv)}};
  } else if (name == "zscore") {
    const sample& p = single(name, ts);
    out.scores = z_score(p.x, need_ref(name, s));
  }
  out.details["query_count"] = m.query_count() - before;
  return out;
}

std::vector<comparison> compare_to(const std::vector<method_output>& outputs, const std::string& reference) {
  const auto ref = std::find_if(outputs.begin(), outputs.end(), [&](const auto& o) { return o.name == reference; });
  if (ref == outputs.end()) throw config_error("reference method '" + reference + "' was not run");
  std::vector<comparison> out;
  for (const auto& o : outputs) {
    if (o.name == reference) continue;
    out.push_back({o.name, consistency(ref->scores, o.scores)});
  }
  return out;
}

json to_json(const consistency_report& r) {
  json j = {{"smr", r.smr}, {"hit25", r.hit25}};
  j["kendall_tau"] = r.kendall_tau ? json(*r.kendall_tau) : json(nullptr);
  j["spearman_rho"] = r.spearman_rho ? json(*r.spearman_rho) : json(nullptr);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace gpattr
