#include "gpattr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace gpattr {

anomaly_score anomaly(const model& m, const vec& x_t, double y_t, double noise_variance) {
  if (!(noise_variance > 0.0)) throw config_error("noise variance must be positive");
  const double r = y_t - m.evaluate(x_t);
  return {0.5 * std::log(2.0 * std::numbers::pi * noise_variance) + r * r / (2.0 * noise_variance), std::nullopt};
}

anomaly_score collective_anomaly(const model& m, const test_set& ts, double noise_variance) {
  if (ts.samples.empty()) throw config_error("test set is empty");
  double sum = 0.0;
  for (const auto& s : ts.samples) sum += anomaly(m, s.x, s.y, noise_variance).value;
  return {sum / static_cast<double>(ts.size()), std::nullopt};
}

namespace {

void check_pair(const vec& a, const vec& b, std::size_t min_len) {
  if (a.size() != b.size()) throw config_error("score vectors differ in length");
  if (a.size() < min_len) throw config_error("score vectors are too short");
}

vec absolute(const vec& v) {
  vec out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::abs(x); });
  return out;
}

bool constant(const vec& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

vec average_ranks(const vec& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  vec ranks(v.size());
  for (std::size_t s = 0; s < idx.size();) {
    std::size_t e = s;
    while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[s]]) ++e;
    const double r = (static_cast<double>(s) + static_cast<double>(e)) / 2.0 + 1.0;
    for (std::size_t k = s; k <= e; ++k) ranks[idx[k]] = r;
    s = e + 1;
  }
  return ranks;
}

std::vector<std::size_t> top_quarter(const vec& v) {
  const vec a = absolute(v);
  std::vector<std::size_t> idx(a.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return a[i] > a[j]; });
  idx.resize((a.size() + 3) / 4);
  return idx;
}

}  // namespace

double kendall_tau(const vec& a, const vec& b) {
  check_pair(a, b, 2);
  const vec x = absolute(a), y = absolute(b);
  if (constant(x) || constant(y)) throw config_error("Kendall tau undefined for a constant vector");
  double concordant = 0.0, discordant = 0.0, ties_x = 0.0, ties_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const int sx = sgn(x[i] - x[j]), sy = sgn(y[i] - y[j]);
      if (sx == 0 && sy == 0) continue;
      if (sx == 0) ties_x += 1.0;
      else if (sy == 0) ties_y += 1.0;
      else if (sx == sy) concordant += 1.0;
      else discordant += 1.0;
    }
  const double n0 = concordant + discordant;
  return (concordant - discordant) / std::sqrt((n0 + ties_x) * (n0 + ties_y));
}

double spearman_rho(const vec& a, const vec& b) {
  check_pair(a, b, 2);
  const vec x = absolute(a), y = absolute(b);
  if (constant(x) || constant(y)) throw config_error("Spearman rho undefined for a constant vector");
  const vec rx = average_ranks(x), ry = average_ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double sign_match_ratio(const vec& reference, const vec& candidate) {
  check_pair(reference, candidate, 1);
  std::size_t opposite = 0;
  for (std::size_t i = 0; i < reference.size(); ++i)
    if (sgn(reference[i]) * sgn(candidate[i]) == -1) ++opposite;
  return 1.0 - static_cast<double>(opposite) / static_cast<double>(reference.size());
}

double hit_ratio_25(const vec& reference, const vec& candidate) {
  check_pair(reference, candidate, 1);
  const auto r = top_quarter(reference), c = top_quarter(candidate);
  std::size_t hits = 0;
  for (std::size_t i : r)
    if (std::find(c.begin(), c.end(), i) != c.end()) ++hits;
  return static_cast<double>(hits) / static_cast<double>(r.size());
}

consistency_report consistency(const vec& reference, const vec& candidate) {
  consistency_report out;
  out.smr = sign_match_ratio(reference, candidate);
  out.hit25 = hit_ratio_25(reference, candidate);
  try {
    out.kendall_tau = kendall_tau(reference, candidate);
    out.spearman_rho = spearman_rho(reference, candidate);
  } catch (const config_error& e) {
    out.kendall_tau.reset();
    out.spearman_rho.reset();
    out.note = e.what();
  }
  return out;
}

}  // namespace gpattr
