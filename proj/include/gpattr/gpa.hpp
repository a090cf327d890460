#pragma once
#include <cstdint>
#include <optional>

#include "gpattr/gradient.hpp"
#include "gpattr/prox.hpp"
#include "gpattr/test_set.hpp"

namespace gpattr {

enum class rate_mode { constant, local_kernel };

struct kernel_params {
  double w0 = 0.0;
  double eta0 = 1.0;
};

struct gpa_hyperparams {
  double eta = 0.1;
  double nu = 0.5;
  double kappa = 0.1;
  double a0 = 5.5;
  rate_mode b_mode = rate_mode::constant;
  std::optional<double> b0;  // unset: a0 * sigma_yf^2 / c_b from the test set
  double c_b = 10.0;
  kernel_params kernel;
  int kernel_iters = 1000;
  int max_iter = 10000;
  double tol = 1e-6;
  int grid_points = 100;
  double delta_max_factor = 1.1;
  std::uint64_t init_seed = 0;
  double init_scale = 1e-3;

  void validate() const;

  // kappa = 0.1 / N, eta = 0.1 * N, nu = 0.5, 2 a0 = 11, c_b = 10.
  static gpa_hyperparams defaults_for(std::size_t n_test);
};

struct attribution_result {
  vec delta_star;
  vec last_g;
  double last_threshold = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  vec objective_trace;
  std::uint64_t query_count = 0;
  vec rates;  // b(x^t) per sample
  double final_kappa = 0.0;
};

struct score_distribution {
  std::size_t variable_index = 0;
  double delta_max = 0.0;
  vec grid;
  vec probs;
};

// Per-sample gamma rates b(x^t) according to hp.b_mode.
vec resolve_rates(const test_set& ts, const model& m, const gpa_hyperparams& hp);

// (eta/2)|delta|^2 + sum_t ((2a0+1)/2) ln(1 + r_t^2 / (2 b_t)), r_t = y_t - f(x_t + delta).
// The l1 term is not included.
double objective(const vec& delta, const test_set& ts, const model& m, const gpa_hyperparams& hp,
                 const vec& rates);
double objective(const vec& delta, const test_set& ts, const model& m, const gpa_hyperparams& hp);

attribution_result map_estimate(const test_set& ts, const model& m, const gpa_hyperparams& hp,
                                const gradient_source& grad);

std::vector<score_distribution> score_distributions(const vec& delta_star, const test_set& ts,
                                                    const model& m, const gpa_hyperparams& hp,
                                                    const vec& rates);
std::vector<score_distribution> score_distributions(const vec& delta_star, const test_set& ts,
                                                    const model& m, const gpa_hyperparams& hp);

// Symmetric equally spaced grid on [-delta_max, delta_max].
vec symmetric_grid(double delta_max, int points);
double distribution_half_width(const vec& delta_star, double factor);

double select_gamma_shape(int n_virtual);
double init_gamma_rate(const test_set& ts, const model& m, double a0, double c_b);
double refine_gamma_rate(const test_set& ts, const model& m, double a0, double b_init,
                         std::size_t anchor, const kernel_params& kernel, int iters);

}  // namespace gpattr
