#include "gpattr/gpa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gpattr {

void gpa_hyperparams::validate() const {
  if (!(eta > 0.0)) throw config_error("eta must be positive");
  if (!(nu > 0.0 && nu <= 1.0)) throw config_error("nu must lie in (0, 1]");
  if (!(kappa > 0.0)) throw config_error("kappa must be positive");
  if (!(a0 > 0.0)) throw config_error("a0 must be positive");
  if (!(c_b > 0.0)) throw config_error("c_b must be positive");
  if (b0 && !(*b0 > 0.0)) throw config_error("b0 must be positive");
  if (!(kernel.w0 >= 0.0) || !(kernel.eta0 > 0.0)) throw config_error("kernel needs w0 >= 0 and eta0 > 0");
  if (max_iter < 1 || !(tol > 0.0)) throw config_error("max_iter and tol must be positive");
  if (grid_points < 3) throw config_error("grid_points must be at least 3");
  if (!(delta_max_factor > 0.0)) throw config_error("delta_max_factor must be positive");
  if (!(init_scale >= 0.0)) throw config_error("init_scale must be nonnegative");
}

gpa_hyperparams gpa_hyperparams::defaults_for(std::size_t n_test) {
  gpa_hyperparams hp;
  const double n = static_cast<double>(std::max<std::size_t>(n_test, 1));
  hp.kappa = 0.1 / n;
  hp.eta = 0.1 * n;
  return hp;
}

namespace {

void check_inputs(const test_set& ts, const model& m) {
  if (ts.samples.empty()) throw config_error("test set is empty");
  for (const auto& s : ts.samples)
    if (s.x.size() != m.dimension()) throw dimension_error(m.dimension(), s.x.size());
}

vec shifted(const vec& x, const vec& delta) {
  vec out(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += delta[i];
  return out;
}

vec residuals(const test_set& ts, const model& m) {
  vec r;
  r.reserve(ts.size());
  for (std::size_t t = 0; t < ts.size(); ++t) {
    const double f = m.evaluate(ts.samples[t].x);
    if (!std::isfinite(f)) throw numeric_error("model output is not finite", t);
    r.push_back(ts.samples[t].y - f);
  }
  return r;
}

double l1(const vec& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

double select_gamma_shape(int n_virtual) {
  if (n_virtual < 1) throw config_error("virtual sample size must be at least 1");
  return (n_virtual + 1) / 2.0;
}

double init_gamma_rate(const test_set& ts, const model& m, double a0, double c_b) {
  check_inputs(ts, m);
  if (!(c_b > 0.0)) throw config_error("c_b must be positive");
  double s2 = 0.0;
  for (double r : residuals(ts, m)) s2 += r * r;
  s2 /= static_cast<double>(ts.size());
  return a0 * std::max(s2, 1e-6) / c_b;
}

double refine_gamma_rate(const test_set& ts, const model& m, double a0, double b_init, std::size_t anchor,
                         const kernel_params& kernel, int iters) {
  if (ts.size() < 2) throw config_error("kernel rate refinement needs at least two samples; use init_gamma_rate");
  check_inputs(ts, m);
  if (anchor >= ts.size()) throw config_error("anchor index out of range");
  if (!(b_init > 0.0) || iters < 1) throw config_error("refinement needs b_init > 0 and iters >= 1");

  const vec r = residuals(ts, m);
  const vec& xt = ts.samples[anchor].x;
  vec w(ts.size(), 0.0);
  double wsum = 0.0;
  for (std::size_t n = 0; n < ts.size(); ++n) {
    if (n == anchor) continue;
    double d2 = 0.0;
    for (std::size_t i = 0; i < xt.size(); ++i) {
      const double d = ts.samples[n].x[i] - xt[i];
      d2 += d * d;
    }
    w[n] = kernel.w0 + std::exp(-d2 / (2.0 * kernel.eta0 * kernel.eta0));
    wsum += w[n];
  }
  if (!(wsum > 0.0)) throw config_error("kernel weights vanish; increase w0 or eta0");

  const double floor = 1e-6 * b_init;
  double b = b_init;
  for (int k = 0; k < iters; ++k) {
    double inv = 0.0;
    for (std::size_t n = 0; n < ts.size(); ++n)
      if (n != anchor) inv += (w[n] / wsum) / (2.0 * b + r[n] * r[n]);
    inv *= (2.0 * a0 + 1.0) / a0;
    const double next = std::max(1.0 / inv, floor);
    const double rel = std::abs(next - b) / b;
    b = next;
    if (rel < 1e-6) break;
  }
  return b;
}

vec resolve_rates(const test_set& ts, const model& m, const gpa_hyperparams& hp) {
  check_inputs(ts, m);
  const double base = hp.b0 ? *hp.b0 : init_gamma_rate(ts, m, hp.a0, hp.c_b);
  vec rates(ts.size(), base);
  if (hp.b_mode == rate_mode::local_kernel)
    for (std::size_t t = 0; t < ts.size(); ++t)
      rates[t] = refine_gamma_rate(ts, m, hp.a0, base, t, hp.kernel, hp.kernel_iters);
  return rates;
}

double objective(const vec& delta, const test_set& ts, const model& m, const gpa_hyperparams& hp,
                 const vec& rates) {
  check_inputs(ts, m);
  if (delta.size() != m.dimension()) throw dimension_error(m.dimension(), delta.size());
  if (rates.size() != ts.size()) throw config_error("one rate per test sample is required");
  double sq = 0.0;
  for (double d : delta) sq += d * d;
  double j = 0.5 * hp.eta * sq;
  const double c = (2.0 * hp.a0 + 1.0) / 2.0;
  for (std::size_t t = 0; t < ts.size(); ++t) {
    if (!(rates[t] > 0.0)) throw config_error("gamma rate b(x^t) must be positive");
    const double f = m.evaluate(shifted(ts.samples[t].x, delta));
    if (!std::isfinite(f)) throw numeric_error("model output is not finite", t);
    const double r = ts.samples[t].y - f;
    j += c * std::log1p(r * r / (2.0 * rates[t]));
  }
  return j;
}

double objective(const vec& delta, const test_set& ts, const model& m, const gpa_hyperparams& hp) {
  return objective(delta, ts, m, hp, resolve_rates(ts, m, hp));
}

attribution_result map_estimate(const test_set& ts, const model& m, const gpa_hyperparams& hp,
                                const gradient_source& grad) {
  hp.validate();
  check_inputs(ts, m);
  const std::uint64_t start_count = m.query_count();
  const vec rates = resolve_rates(ts, m, hp);
  const std::size_t dim = m.dimension();
  const double c = 2.0 * hp.a0 + 1.0;

  smooth_term term;
  term.value = [&](const vec& d) { return objective(d, ts, m, hp, rates); };
  term.value_and_grad = [&](const vec& d) {
    double sq = 0.0;
    for (double v : d) sq += v * v;
    double j = 0.5 * hp.eta * sq;
    vec g(dim);
    for (std::size_t i = 0; i < dim; ++i) g[i] = hp.eta * d[i];
    for (std::size_t t = 0; t < ts.size(); ++t) {
      const auto est = value_and_gradient(m, shifted(ts.samples[t].x, d), grad);
      if (!std::isfinite(est.value)) throw numeric_error("model output is not finite", t);
      const double r = ts.samples[t].y - est.value;
      j += 0.5 * c * std::log1p(r * r / (2.0 * rates[t]));
      const double w = c * r / (2.0 * rates[t] + r * r);
      for (std::size_t i = 0; i < dim; ++i) g[i] -= w * est.grad[i];
    }
    return std::pair<double, vec>{j, g};
  };

  prox_options opt;
  opt.eta = hp.eta;
  opt.nu = hp.nu;
  opt.kappa = hp.kappa;
  opt.max_iter = hp.max_iter;
  opt.tol = hp.tol;
  opt.init_seed = hp.init_seed;
  opt.init_scale = hp.init_scale;
  auto pr = proximal_descent(dim, term, opt);

  attribution_result out;
  out.delta_star = std::move(pr.delta);
  out.last_g = std::move(pr.last_g);
  out.last_threshold = pr.last_threshold;
  out.iterations = pr.iterations;
  out.converged = pr.converged;
  out.stalled = pr.stalled;
  out.objective_trace = std::move(pr.objective_trace);
  out.rates = rates;
  out.final_kappa = pr.final_kappa;
  out.query_count = m.query_count() - start_count;
  return out;
}

vec symmetric_grid(double delta_max, int points) {
  if (points < 3 || !(delta_max > 0.0)) throw config_error("grid needs >= 3 points and delta_max > 0");
  vec grid(points);
  const int n = points - 1;
  for (int i = 0; i <= n; ++i) grid[i] = delta_max * static_cast<double>(2 * i - n) / n;
  return grid;
}

double distribution_half_width(const vec& delta_star, double factor) {
  double mx = 0.0;
  for (double d : delta_star) mx = std::max(mx, std::abs(d));
  return mx < 1e-9 ? 1.0 : factor * mx;
}

std::vector<score_distribution> score_distributions(const vec& delta_star, const test_set& ts, const model& m,
                                                    const gpa_hyperparams& hp, const vec& rates) {
  hp.validate();
  check_inputs(ts, m);
  if (delta_star.size() != m.dimension()) throw dimension_error(m.dimension(), delta_star.size());
  for (double d : delta_star)
    if (!std::isfinite(d)) throw config_error("MAP point is not finite");

  const double dmax = distribution_half_width(delta_star, hp.delta_max_factor);
  const vec grid = symmetric_grid(dmax, hp.grid_points);
  std::vector<score_distribution> out;
  for (std::size_t k = 0; k < delta_star.size(); ++k) {
    score_distribution q;
    q.variable_index = k;
    q.delta_max = dmax;
    q.grid = grid;
    vec logq(grid.size(), -std::numeric_limits<double>::infinity());
    double best = -std::numeric_limits<double>::infinity();
    vec d(delta_star);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      d[k] = grid[i];
      double v = -std::numeric_limits<double>::infinity();
      try {
        v = -(objective(d, ts, m, hp, rates) + hp.eta * hp.nu * l1(d));
      } catch (const numeric_error&) {
      }
      if (std::isfinite(v)) {
        logq[i] = v;
        best = std::max(best, v);
      }
    }
    if (!std::isfinite(best))
      throw numeric_error("every grid evaluation is non-finite for variable " + std::to_string(k), 0);
    q.probs.resize(grid.size());
    double z = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      q.probs[i] = std::isfinite(logq[i]) ? std::exp(logq[i] - best) : 0.0;
      z += q.probs[i];
    }
    for (auto& p : q.probs) p /= z;
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<score_distribution> score_distributions(const vec& delta_star, const test_set& ts, const model& m,
                                                    const gpa_hyperparams& hp) {
  return score_distributions(delta_star, ts, m, hp, resolve_rates(ts, m, hp));
}

}  // namespace gpattr
