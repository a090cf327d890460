#pragma once
#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpattr/gpa.hpp"
#include "gpattr/test_set.hpp"

namespace gpattr {

inline constexpr int schema_version = 1;

// Header row required; the last column is the target.
test_set load_csv(const std::string& path);
test_set parse_csv(const std::string& text);

// Feature-only table; a trailing target column is dropped when it has dimension + 1 columns.
std::vector<vec> load_reference_csv(const std::string& path, std::size_t dimension);

struct variable_stats {
  vec mean;
  vec scale;
};

variable_stats estimate_stats(const test_set& ts);  // population std
test_set standardize(const test_set& ts, const std::optional<variable_stats>& stats);
vec inverse_transform_x(const test_set& standardized, const vec& z);
vec delta_to_raw(const test_set& standardized, const vec& delta);

struct method_output {
  std::string name;
  vec scores;
  std::optional<vec> raw_scores;
  std::vector<score_distribution> distribution;
  nlohmann::json details = nlohmann::json::object();
};

struct run_report {
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json anomaly_scores = nlohmann::json::array();
  std::vector<method_output> methods;
  nlohmann::json diagnostics = nlohmann::json::object();
};

nlohmann::json to_json(const run_report& r);
run_report report_from_json(const nlohmann::json& j);

// Sorted keys, doubles as %.17g, two-space indent.
std::string dump_stable(const nlohmann::json& j);
void write_text(const std::string& path, const std::string& text);
void emit_result_json(const run_report& r, const std::string& path);
run_report load_result_json(const std::string& path);

struct litmus_cell {
  std::string color;  // hex fill
  double opacity = 0.0;
};

// Each row scaled by its max |score| (0/0 = 0); blue below zero, red above.
std::vector<std::vector<litmus_cell>> litmus_cells(const std::vector<vec>& rows);
std::string render_litmus_svg(const std::vector<std::pair<std::string, vec>>& rows,
                              const std::vector<std::string>& variable_names);
void emit_litmus_svg(const run_report& r, const std::vector<std::string>& variable_names,
                     const std::string& path);

std::string render_distribution_svg(const std::vector<score_distribution>& dists, const vec& map_point,
                                    const std::vector<std::string>& variable_names);
void emit_distribution_svg(const std::vector<score_distribution>& dists, const vec& map_point,
                           const std::vector<std::string>& variable_names, const std::string& path);

}  // namespace gpattr
