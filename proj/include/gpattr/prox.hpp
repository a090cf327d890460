#pragma once
#include <cstdint>
#include <functional>

#include "gpattr/model.hpp"

namespace gpattr {

// Elementwise sign(g) * max(0, |g| - threshold).
vec soft_threshold(const vec& g, double threshold);

struct prox_options {
  double eta = 0.1;
  double nu = 0.5;
  double kappa = 0.1;
  int max_iter = 10000;
  double tol = 1e-6;
  std::uint64_t init_seed = 0;
  double init_scale = 1e-3;
  int max_halvings = 20;
};

// Smooth part J and its gradient at delta.
struct smooth_term {
  std::function<double(const vec&)> value;
  std::function<std::pair<double, vec>(const vec&)> value_and_grad;
};

struct prox_result {
  vec delta;
  vec last_g;  // argument of the final soft-threshold
  double last_threshold = 0.0;
  int iterations = 0;
  bool converged = false;
  vec objective_trace;  // J + eta*nu*|delta|_1 at the initial point and every accepted iterate
  double final_kappa = 0.0;
  int halvings = 0;
  bool stalled = false;  // stopped because no step size passed the descent test
};

// Proximal gradient starting from a seeded uniform box around 0. Each step is
// g = delta - kappa * grad J followed by soft-thresholding at eta*nu, so the fixed points are those
// of J + (eta*nu/kappa)|delta|_1. While J(delta') exceeds its quadratic upper bound around delta,
// kappa is halved together with the threshold, which leaves the fixed points alone. Each
// iteration first retries twice the last accepted kappa, capped at the configured value.
prox_result proximal_descent(std::size_t dimension, const smooth_term& j, const prox_options& opt);

}  // namespace gpattr
