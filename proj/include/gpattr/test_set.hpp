#pragma once
#include <string>
#include <vector>

#include "gpattr/model.hpp"

namespace gpattr {

struct sample {
  vec x;
  double y = 0.0;
};

enum class stats_provenance { none, user_supplied, test_set_estimated };

struct standardization {
  stats_provenance provenance = stats_provenance::none;
  vec mean;
  vec scale;
};

struct test_set {
  std::vector<sample> samples;
  std::vector<std::string> variable_names;
  std::string target_name = "y";
  standardization stats;

  std::size_t size() const { return samples.size(); }
  std::size_t dimension() const { return samples.empty() ? variable_names.size() : samples[0].x.size(); }
};

}  // namespace gpattr
