#include "gpattr/prox.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gpattr {

vec soft_threshold(const vec& g, double threshold) {
  if (threshold < 0.0) throw config_error("soft-threshold needs a nonnegative threshold");
  vec out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double mag = std::abs(g[i]) - threshold;
    out[i] = mag > 0.0 ? std::copysign(mag, g[i]) : 0.0;
  }
  return out;
}

namespace {

double l1(const vec& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

prox_result proximal_descent(std::size_t dimension, const smooth_term& j, const prox_options& opt) {
  if (!(opt.eta > 0.0) || !(opt.kappa > 0.0) || !(opt.nu > 0.0 && opt.nu <= 1.0))
    throw config_error("proximal descent needs eta > 0, kappa > 0 and 0 < nu <= 1");
  if (opt.max_iter < 1 || !(opt.tol > 0.0)) throw config_error("max_iter and tol must be positive");

  const double thr = opt.eta * opt.nu;
  // l1 weight of the objective actually descended; a halved kappa shrinks the threshold with it
  const double weight = thr / opt.kappa;
  std::mt19937_64 rng(opt.init_seed);
  std::uniform_real_distribution<double> box(-opt.init_scale, opt.init_scale);
  prox_result out;
  vec delta(dimension);
  for (auto& d : delta) d = box(rng);

  double kappa = opt.kappa;
  double cur = j.value(delta);
  if (!std::isfinite(cur)) throw divergence_error("objective is not finite at the initial point");
  out.objective_trace.push_back(cur + thr * l1(delta));

  for (int it = 1; it <= opt.max_iter; ++it) {
    auto [value, grad] = j.value_and_grad(delta);
    cur = value;
    vec g(dimension), next, step(dimension);
    double next_value = 0.0;
    bool accepted = false;
    kappa = std::min(opt.kappa, 2.0 * kappa);
    for (int h = 0; h <= opt.max_halvings; ++h) {
      if (h > 0) {
        kappa *= 0.5;
        ++out.halvings;
      }
      for (std::size_t i = 0; i < dimension; ++i) g[i] = delta[i] - kappa * grad[i];
      next = soft_threshold(g, kappa * weight);
      next_value = j.value(next);
      double lin = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < dimension; ++i) {
        step[i] = next[i] - delta[i];
        lin += grad[i] * step[i];
        sq += step[i] * step[i];
      }
      const double bound = cur + lin + sq / (2.0 * kappa) + 1e-12 * std::max(1.0, std::abs(cur));
      if (std::isfinite(next_value) && next_value <= bound) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!std::isfinite(next_value))
        throw divergence_error("objective is not finite after " + std::to_string(opt.max_halvings) +
                               " step halvings; try a smaller kappa");
      // the gradient (typically a Monte Carlo estimate) no longer yields descent at any step size
      out.stalled = true;
      kappa = opt.kappa * std::ldexp(1.0, -opt.max_halvings);
      break;
    }

    double change = 0.0;
    for (std::size_t i = 0; i < dimension; ++i) change = std::max(change, std::abs(step[i]));
    delta = std::move(next);
    out.last_g = g;
    out.last_threshold = kappa * weight;
    out.iterations = it;
    out.objective_trace.push_back(next_value + thr * l1(delta));
    // measured at the nominal step size so that backtracking cannot fake convergence
    if (change * opt.kappa / kappa < opt.tol) {
      out.converged = true;
      break;
    }
  }
  out.delta = std::move(delta);
  out.final_kappa = kappa;
  return out;
}

}  // namespace gpattr
