#pragma once
#include <cstdint>

#include "gpattr/model.hpp"

namespace gpattr {

struct gradient_estimator_config {
  double perturbation_std = 1.0;  // eta1, standardized input units
  int mc_samples = 10;
  std::uint64_t seed = 0;
  void validate() const;
};

struct gradient_estimate {
  vec grad;
  double value = 0.0;  // f(x), evaluated once and shared by every draw
  std::uint64_t redraws = 0;
};

// Monte Carlo mean of [f(x + h e_i) - f(x)] / h with h ~ N(0, eta1^2). Draws for coordinate i
// come from a stream seeded by (seed, i), so the result does not depend on evaluation order.
// Issues exactly 1 + M * mc_samples model evaluations; redraws of tiny h cost no queries.
gradient_estimate estimate_gradient(const model& m, const vec& x, const gradient_estimator_config& cfg);

// Either the estimator above or the model's closed-form gradient.
struct gradient_source {
  bool analytic = false;
  gradient_estimator_config mc;

  static gradient_source closed_form() { return {true, {}}; }
  static gradient_source monte_carlo(gradient_estimator_config cfg) { return {false, cfg}; }
};

// Returns f(x) together with the gradient; closed-form mode costs one query.
gradient_estimate value_and_gradient(const model& m, const vec& x, const gradient_source& src);

}  // namespace gpattr
