#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gpattr/io.hpp"

namespace gpattr {

namespace {

const char* const blue = "#2166ac";
const char* const red = "#b2182b";
const char* const palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
                               "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b15928"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string name_of(const std::vector<std::string>& names, std::size_t i) {
  return i < names.size() ? names[i] : "x" + std::to_string(i + 1);
}

}  // namespace

std::vector<std::vector<litmus_cell>> litmus_cells(const std::vector<vec>& rows) {
  std::vector<std::vector<litmus_cell>> out;
  for (const auto& row : rows) {
    double mx = 0.0;
    for (double v : row) mx = std::max(mx, std::abs(v));
    std::vector<litmus_cell> cells;
    for (double v : row) {
      const double mag = mx > 0.0 ? std::abs(v) / mx : 0.0;
      cells.push_back({v < 0.0 ? blue : (v > 0.0 ? red : "#ffffff"), mag});
    }
    out.push_back(std::move(cells));
  }
  return out;
}

std::string render_litmus_svg(const std::vector<std::pair<std::string, vec>>& rows,
                              const std::vector<std::string>& variable_names) {
  if (rows.empty()) throw config_error("litmus plot needs at least one method");
  const std::size_t cols = rows.front().second.size();
  if (cols == 0) throw config_error("litmus plot needs at least one variable");
  std::vector<vec> values;
  for (const auto& r : rows) {
    if (r.second.size() != cols) throw config_error("litmus rows differ in length");
    values.push_back(r.second);
  }
  const auto cells = litmus_cells(values);
  const int cw = 60, ch = 30, left = 110, top = 40;
  const int width = left + cw * static_cast<int>(cols) + 10;
  const int height = top + ch * static_cast<int>(rows.size()) + 10;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t c = 0; c < cols; ++c)
    s << "<text class=\"variable\" x=\"" << left + cw * c + cw / 2 << "\" y=\"" << top - 10
      << "\" font-size=\"11\" text-anchor=\"middle\">" << escape(name_of(variable_names, c)) << "</text>\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int y = top + ch * static_cast<int>(r);
    s << "<text class=\"method\" x=\"" << left - 8 << "\" y=\"" << y + ch / 2 + 4
      << "\" font-size=\"12\" text-anchor=\"end\">" << escape(rows[r].first) << "</text>\n";
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& cell = cells[r][c];
      s << "<rect class=\"cell\" x=\"" << left + cw * c << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch
        << "\" fill=\"" << cell.color << "\" fill-opacity=\"" << num(cell.opacity)
        << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

void emit_litmus_svg(const run_report& r, const std::vector<std::string>& variable_names, const std::string& path) {
  std::vector<std::pair<std::string, vec>> rows;
  for (const auto& m : r.methods) rows.emplace_back(m.name, m.scores);
  write_text(path, render_litmus_svg(rows, variable_names));
}

std::string render_distribution_svg(const std::vector<score_distribution>& dists, const vec& map_point,
                                    const std::vector<std::string>& variable_names) {
  if (dists.empty()) throw config_error("distribution plot needs at least one variable");
  const double dmax = dists.front().delta_max;
  double pmax = 0.0;
  for (const auto& q : dists) {
    if (q.delta_max != dmax) throw config_error("distribution grids must share delta_max");
    for (double p : q.probs) pmax = std::max(pmax, p);
  }
  if (!(pmax > 0.0)) pmax = 1.0;
  const double w = 640, h = 400, ml = 60, mr = 150, mt = 20, mb = 40;
  const double pw = w - ml - mr, ph = h - mt - mb;
  auto sx = [&](double d) { return ml + (d + dmax) / (2.0 * dmax) * pw; };
  auto sy = [&](double p) { return mt + ph - p / (pmax * 1.05) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s << "<line class=\"axis\" x1=\"" << num(ml) << "\" y1=\"" << num(mt + ph) << "\" x2=\"" << num(ml + pw) << "\" y2=\""
    << num(mt + ph) << "\" stroke=\"#000000\"/>\n";
  s << "<line class=\"axis\" x1=\"" << num(ml) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(ml) << "\" y2=\""
    << num(mt + ph) << "\" stroke=\"#000000\"/>\n";
  s << "<text x=\"" << num(ml) << "\" y=\"" << num(h - 12) << "\" font-size=\"11\" text-anchor=\"middle\">" << num(-dmax)
    << "</text>\n";
  s << "<text x=\"" << num(ml + pw) << "\" y=\"" << num(h - 12) << "\" font-size=\"11\" text-anchor=\"middle\">"
    << num(dmax) << "</text>\n";
  s << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(h - 4) << "\" font-size=\"12\" text-anchor=\"middle\">delta</text>\n";
  for (std::size_t k = 0; k < dists.size(); ++k) {
    const auto& q = dists[k];
    const char* color = palette[k % (sizeof palette / sizeof palette[0])];
    s << "<polyline class=\"curve\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < q.grid.size(); ++i) s << (i ? " " : "") << num(sx(q.grid[i])) << "," << num(sy(q.probs[i]));
    s << "\"/>\n";
    if (k < map_point.size()) {
      const double mx = sx(std::clamp(map_point[k], -dmax, dmax));
      s << "<line class=\"map-marker\" x1=\"" << num(mx) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(mx) << "\" y2=\""
        << num(mt + ph) << "\" stroke=\"" << color << "\" stroke-dasharray=\"4,3\"/>\n";
    }
    const double ly = mt + 16.0 * static_cast<double>(k + 1);
    s << "<line x1=\"" << num(ml + pw + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(ml + pw + 30) << "\" y2=\""
      << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text class=\"legend\" x=\"" << num(ml + pw + 35) << "\" y=\"" << num(ly) << "\" font-size=\"12\">"
      << escape(name_of(variable_names, q.variable_index)) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void emit_distribution_svg(const std::vector<score_distribution>& dists, const vec& map_point,
                           const std::vector<std::string>& variable_names, const std::string& path) {
  write_text(path, render_distribution_svg(dists, map_point, variable_names));
}

}  // namespace gpattr
