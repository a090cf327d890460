#include "gpattr/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gpattr {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::vector<std::vector<std::string>> read_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_row(line));
  }
  return rows;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<vec> numeric_body(const std::vector<std::vector<std::string>>& rows) {
  std::vector<vec> out;
  const std::size_t width = rows[0].size();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width)
      throw config_error("row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                         " cells, header has " + std::to_string(width));
    vec v(width);
    for (std::size_t c = 0; c < width; ++c)
      if (!parse_number(rows[r][c], v[c]))
        throw config_error("non-numeric cell at row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1) +
                           " ('" + rows[r][c] + "')");
    out.push_back(std::move(v));
  }
  return out;
}

void check_header(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) throw config_error("CSV is empty");
  bool all_numeric = true;
  for (const auto& cell : rows[0]) {
    double v = 0.0;
    all_numeric = all_numeric && parse_number(cell, v);
  }
  if (all_numeric) throw config_error("CSV has no header row");
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

void dump_into(const json& j, std::string& out, int depth) {
  const std::string pad(2 * (depth + 1), ' '), close_pad(2 * depth, ' ');
  switch (j.type()) {
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_into(j[i], out, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad;
        dump_into(j[i], out, depth + 1);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += close_pad + "]";
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad + json(it.key()).dump() + ": ";
        dump_into(it.value(), out, depth + 1);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += close_pad + "}";
      return;
    }
    default:
      out += j.dump();
  }
}

json vec_json(const vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

vec json_vec(const json& j) {
  vec v;
  for (const auto& e : j) v.push_back(e.is_null() ? std::nan("") : e.get<double>());
  return v;
}

}  // namespace

test_set parse_csv(const std::string& text) {
  const auto rows = read_rows(text);
  check_header(rows);
  if (rows[0].size() < 2) throw config_error("CSV needs at least one feature column and a target column");
  test_set ts;
  ts.variable_names.assign(rows[0].begin(), rows[0].end() - 1);
  ts.target_name = rows[0].back();
  for (auto& v : numeric_body(rows)) {
    sample s;
    s.y = v.back();
    v.pop_back();
    s.x = std::move(v);
    ts.samples.push_back(std::move(s));
  }
  return ts;
}

test_set load_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::vector<vec> load_reference_csv(const std::string& path, std::size_t dimension) {
  const auto rows = read_rows(read_file(path));
  check_header(rows);
  const std::size_t width = rows[0].size();
  if (width != dimension && width != dimension + 1)
    throw config_error("reference file has " + std::to_string(width) + " columns, expected " +
                       std::to_string(dimension) + " or " + std::to_string(dimension + 1));
  auto body = numeric_body(rows);
  for (auto& v : body) v.resize(dimension);
  if (body.empty()) throw config_error("reference file has no rows");
  return body;
}

variable_stats estimate_stats(const test_set& ts) {
  if (ts.samples.empty()) throw config_error("cannot estimate statistics from an empty test set");
  const std::size_t dim = ts.dimension();
  variable_stats st{vec(dim, 0.0), vec(dim, 0.0)};
  const double n = static_cast<double>(ts.size());
  for (const auto& s : ts.samples)
    for (std::size_t i = 0; i < dim; ++i) st.mean[i] += s.x[i] / n;
  for (const auto& s : ts.samples)
    for (std::size_t i = 0; i < dim; ++i) st.scale[i] += (s.x[i] - st.mean[i]) * (s.x[i] - st.mean[i]) / n;
  for (auto& v : st.scale) v = std::sqrt(v);
  return st;
}

test_set standardize(const test_set& ts, const std::optional<variable_stats>& stats) {
  const std::size_t dim = ts.dimension();
  const variable_stats st = stats ? *stats : estimate_stats(ts);
  if (st.mean.size() != dim || st.scale.size() != dim) throw dimension_error(dim, st.mean.size());
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(st.scale[i] > 0.0)) {
      const std::string name = i < ts.variable_names.size() ? ts.variable_names[i] : std::to_string(i);
      throw config_error("cannot standardize variable '" + name + "': zero spread");
    }
  }
  test_set out = ts;
  for (auto& s : out.samples)
    for (std::size_t i = 0; i < dim; ++i) s.x[i] = (s.x[i] - st.mean[i]) / st.scale[i];
  out.stats = {stats ? stats_provenance::user_supplied : stats_provenance::test_set_estimated, st.mean, st.scale};
  return out;
}

vec inverse_transform_x(const test_set& standardized, const vec& z) {
  if (standardized.stats.provenance == stats_provenance::none) return z;
  vec x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = standardized.stats.mean[i] + standardized.stats.scale[i] * z[i];
  return x;
}

vec delta_to_raw(const test_set& standardized, const vec& delta) {
  if (standardized.stats.provenance == stats_provenance::none) return delta;
  vec out(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) out[i] = delta[i] * standardized.stats.scale[i];
  return out;
}

json to_json(const run_report& r) {
  json methods = json::object();
  for (const auto& m : r.methods) {
    json entry = {{"scores", vec_json(m.scores)}};
    if (m.raw_scores) entry["raw_scores"] = vec_json(*m.raw_scores);
    if (!m.distribution.empty()) {
      json probs = json::array();
      for (const auto& q : m.distribution) probs.push_back(vec_json(q.probs));
      entry["distribution"] = {{"delta_max", m.distribution.front().delta_max},
                               {"grid", vec_json(m.distribution.front().grid)},
                               {"probs", probs}};
    }
    if (!m.details.empty()) entry["details"] = m.details;
    methods[m.name] = entry;
  }
  return {{"schema_version", schema_version},
          {"config", r.config},
          {"anomaly_scores", r.anomaly_scores},
          {"methods", methods},
          {"diagnostics", r.diagnostics}};
}

run_report report_from_json(const json& j) {
  if (!j.is_object() || !j.contains("schema_version")) throw config_error("result document has no schema_version");
  if (j["schema_version"].get<int>() != schema_version)
    throw config_error("unsupported schema_version " + j["schema_version"].dump());
  run_report r;
  r.config = j.value("config", json::object());
  r.anomaly_scores = j.value("anomaly_scores", json::array());
  r.diagnostics = j.value("diagnostics", json::object());
  for (auto it = j.at("methods").begin(); it != j.at("methods").end(); ++it) {
    method_output m;
    m.name = it.key();
    const json& e = it.value();
    m.scores = json_vec(e.at("scores"));
    if (e.contains("raw_scores")) m.raw_scores = json_vec(e["raw_scores"]);
    if (e.contains("distribution")) {
      const json& d = e["distribution"];
      const vec grid = json_vec(d.at("grid"));
      std::size_t k = 0;
      for (const auto& p : d.at("probs")) {
        m.distribution.push_back({k++, d.at("delta_max").get<double>(), grid, json_vec(p)});
      }
    }
    if (e.contains("details")) m.details = e["details"];
    r.methods.push_back(std::move(m));
  }
  return r;
}

std::string dump_stable(const json& j) {
  std::string out;
  dump_into(j, out, 0);
  out += "\n";
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw config_error("write failed for '" + path + "'");
}

void emit_result_json(const run_report& r, const std::string& path) { write_text(path, dump_stable(to_json(r))); }

run_report load_result_json(const std::string& path) {
  try {
    return report_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw config_error("cannot parse '" + path + "': " + e.what());
  }
}

}  // namespace gpattr
