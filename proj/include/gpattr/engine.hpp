#pragma once
#include <optional>
#include <string>
#include <vector>

#include "gpattr/baselines.hpp"
#include "gpattr/gpa.hpp"
#include "gpattr/io.hpp"
#include "gpattr/metrics.hpp"

namespace gpattr {

const std::vector<std::string>& known_methods();

// Everything a method run may need. Vectors are in the units the model is queried in.
struct method_settings {
  std::optional<gpa_hyperparams> gpa;  // unset: gpa_hyperparams::defaults_for(N)
  gradient_source grad;
  lime_config lime;
  double baylime_eta = 0.1;
  double baylime_lambda = 1.0;
  double lc_lambda = 1.0;
  std::optional<vec> ig_baseline;
  int ig_intervals = 100;
  std::optional<reference_set> ref;
  shapley_config sv;
  bool gpa_distributions = true;
};

gpa_hyperparams effective_gpa(const method_settings& s, std::size_t n_test);

// Runs one method on ts. Only "gpa" accepts more than one sample (collective attribution).
// Missing per-method inputs raise config_error naming the method.
method_output run_method(const std::string& name, const model& m, const test_set& ts, const method_settings& s);

struct comparison {
  std::string method;
  consistency_report report;
};

std::vector<comparison> compare_to(const std::vector<method_output>& outputs, const std::string& reference);
nlohmann::json to_json(const consistency_report& r);

}  // namespace gpattr
