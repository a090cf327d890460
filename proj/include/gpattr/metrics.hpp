#pragma once
#include <optional>
#include <string>

#include "gpattr/model.hpp"
#include "gpattr/test_set.hpp"

namespace gpattr {

struct anomaly_score {
  double value = 0.0;
  std::optional<std::size_t> sample_index;  // empty for the collective score
};

// -ln N(y | f(x), v) = 0.5 ln(2 pi v) + (y - f(x))^2 / (2v)
anomaly_score anomaly(const model& m, const vec& x_t, double y_t, double noise_variance);
anomaly_score collective_anomaly(const model& m, const test_set& ts, double noise_variance);

// Rank statistics on absolute values. Throw config_error when either |vector| is constant.
double kendall_tau(const vec& a, const vec& b);
double spearman_rho(const vec& a, const vec& b);

double sign_match_ratio(const vec& reference, const vec& candidate);

// Top ceil(M/4) entries by absolute value, lower index first on ties.
double hit_ratio_25(const vec& reference, const vec& candidate);

struct consistency_report {
  std::optional<double> kendall_tau;
  std::optional<double> spearman_rho;
  double smr = 0.0;
  double hit25 = 0.0;
  std::string note;  // why a rank metric is missing
};

consistency_report consistency(const vec& reference, const vec& candidate);

}  // namespace gpattr
