#pragma once
#include <cstdint>
#include <string>

#include "gpattr/gradient.hpp"
#include "gpattr/prox.hpp"

namespace gpattr {

struct reference_set {
  std::vector<vec> samples;
  vec weights;  // empty means uniform

  double weight(std::size_t j) const;
  void validate(std::size_t dimension) const;
};

struct lime_config {
  int n_samples = 1000;
  double sampling_std = 0.3;
  double l1_strength = 0.0;
  std::uint64_t seed = 0;
  int max_sweeps = 10000;
  double cd_tol = 1e-12;
  void validate(std::size_t dimension) const;
};

struct lime_result {
  vec beta;
  double intercept = 0.0;
  bool rank_deficient = false;
};

// Local linear surrogate of F(x, y) = f(x) - y around x_t; l1-penalized via coordinate descent
// on (1/2N)|z - X beta|^2 + nu |beta|_1 with an unpenalized intercept.
lime_result lime(const model& m, const vec& x_t, double y_t, const lime_config& cfg);

// Ordinary least squares (nu -> 0). Rank-deficient designs get the minimum-norm solution.
lime_result lime0(const model& m, const vec& x_t, double y_t, const lime_config& cfg);

struct baylime_result {
  vec mean;
  vec variance;
};

// Bayesian ridge on the unit-variance perturbation design xi = (x - x_t) / sampling_std.
// Variance is the closed form 1 / (prior_eta + noise_lambda * N_s) for every variable.
baylime_result baylime_distributions(const model& m, const vec& x_t, double y_t, const lime_config& cfg,
                                     double prior_eta, double noise_lambda);

struct ig_config {
  vec baseline;
  int n_intervals = 100;
};

// (x_t - x0) * trapezoid integral of grad f along the straight path from x0.
vec integrated_gradient(const model& m, const vec& x_t, const ig_config& cfg, const gradient_source& grad);

vec expected_integrated_gradient(const model& m, const vec& x_t, const reference_set& ref,
                                 int n_intervals, const gradient_source& grad);

enum class shapley_mode { automatic, exact, sampled };

struct shapley_config {
  int n_configs = 100;
  std::uint64_t seed = 0;
  shapley_mode mode = shapley_mode::automatic;
};

// Interventional Shapley values: coordinates outside the coalition take their values from a
// reference sample. Exact subset enumeration when M <= 10 and 2^M |ref| <= 200000.
vec shapley_sampled(const model& m, const vec& x_t, const reference_set& ref, const shapley_config& cfg);
bool shapley_uses_exact(std::size_t dimension, const reference_set& ref, const shapley_config& cfg);

// (x_t - mean) / population std.
vec z_score(const vec& x_t, const reference_set& ref);

struct lc_config {
  double eta = 1e-3;
  double nu = 1e-3;
  double lambda = 1.0;
  double kappa = 0.1;
  int max_iter = 10000;
  double tol = 1e-6;
  std::uint64_t init_seed = 0;
};

// argmin (eta/2)|d|^2 + (lambda/2)(y_t - f(x_t + d))^2 + eta nu |d|_1, same solver as GPA.
prox_result lc(const model& m, const vec& x_t, double y_t, const lc_config& cfg, const gradient_source& grad);

}  // namespace gpattr
