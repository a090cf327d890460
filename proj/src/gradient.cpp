#include "gpattr/gradient.hpp"

#include <cmath>
#include <random>

namespace gpattr {

void gradient_estimator_config::validate() const {
  if (!(perturbation_std > 0.0) || !std::isfinite(perturbation_std))
    throw config_error("perturbation_std must be positive");
  if (mc_samples < 1) throw config_error("mc_samples must be at least 1");
}

gradient_estimate estimate_gradient(const model& m, const vec& x, const gradient_estimator_config& cfg) {
  cfg.validate();
  const std::size_t n = m.dimension();
  if (x.size() != n) throw dimension_error(n, x.size());
  for (double v : x)
    if (!std::isfinite(v)) throw config_error("gradient requested at a non-finite point");

  gradient_estimate out;
  out.value = m.evaluate(x);
  out.grad.assign(n, 0.0);
  const double floor = 1e-8 * cfg.perturbation_std;
  vec probe(x);
  for (std::size_t i = 0; i < n; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> draw(0.0, cfg.perturbation_std);
    double sum = 0.0;
    for (int k = 0; k < cfg.mc_samples; ++k) {
      double h = draw(rng);
      while (std::abs(h) < floor) {
        ++out.redraws;
        h = draw(rng);
      }
      probe[i] = x[i] + h;
      sum += (m.evaluate(probe) - out.value) / h;
    }
    probe[i] = x[i];
    out.grad[i] = sum / cfg.mc_samples;
  }
  return out;
}

gradient_estimate value_and_gradient(const model& m, const vec& x, const gradient_source& src) {
  if (!src.analytic) return estimate_gradient(m, x, src.mc);
  auto g = m.analytic_gradient(x);
  if (!g) throw config_error("model has no closed-form gradient; use the Monte Carlo estimator");
  gradient_estimate out;
  out.value = m.evaluate(x);
  out.grad = std::move(*g);
  return out;
}

}  // namespace gpattr
