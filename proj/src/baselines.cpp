#include "gpattr/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

namespace gpattr {

double reference_set::weight(std::size_t j) const {
  return weights.empty() ? 1.0 / static_cast<double>(samples.size()) : weights[j];
}

void reference_set::validate(std::size_t dimension) const {
  if (samples.empty()) throw config_error("reference set is empty");
  for (const auto& s : samples)
    if (s.size() != dimension) throw dimension_error(dimension, s.size());
  if (!weights.empty()) {
    if (weights.size() != samples.size()) throw config_error("one weight per reference sample is required");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw config_error("reference weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw config_error("reference weights must sum to 1");
  }
}

void lime_config::validate(std::size_t dimension) const {
  if (n_samples < static_cast<int>(dimension) + 1) throw config_error("LIME needs n_samples >= M + 1");
  if (!(sampling_std > 0.0)) throw config_error("LIME sampling_std must be positive");
  if (!(l1_strength >= 0.0)) throw config_error("LIME l1_strength must be nonnegative");
}

namespace {

struct local_design {
  Eigen::MatrixXd x;  // centered perturbations
  Eigen::VectorXd f;  // centered model values
  Eigen::VectorXd x_mean;
  double f_mean = 0.0;
};

local_design sample_design(const model& m, const vec& x_t, const lime_config& cfg) {
  const std::size_t dim = m.dimension();
  if (x_t.size() != dim) throw dimension_error(dim, x_t.size());
  cfg.validate(dim);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.sampling_std);
  std::vector<vec> pts(cfg.n_samples, x_t);
  for (auto& p : pts)
    for (auto& v : p) v += noise(rng);
  const vec fv = m.evaluate_batch(pts);

  local_design d;
  d.x.resize(cfg.n_samples, dim);
  d.f.resize(cfg.n_samples);
  for (int n = 0; n < cfg.n_samples; ++n) {
    if (!std::isfinite(fv[n])) throw numeric_error("model output is not finite during LIME sampling", n);
    d.f(n) = fv[n];
    for (std::size_t i = 0; i < dim; ++i) d.x(n, i) = pts[n][i];
  }
  d.x_mean = d.x.colwise().mean();
  d.f_mean = d.f.mean();
  d.x.rowwise() -= d.x_mean.transpose();
  d.f.array() -= d.f_mean;
  return d;
}

vec to_vec(const Eigen::VectorXd& v) { return vec(v.data(), v.data() + v.size()); }

double intercept_for(const local_design& d, const Eigen::VectorXd& beta, double y_t) {
  return d.f_mean - y_t - beta.dot(d.x_mean);
}

}  // namespace

lime_result lime(const model& m, const vec& x_t, double y_t, const lime_config& cfg) {
  const local_design d = sample_design(m, x_t, cfg);
  const auto n = static_cast<double>(d.x.rows());
  const Eigen::Index dim = d.x.cols();
  Eigen::VectorXd col_sq = d.x.colwise().squaredNorm().transpose() / n;
  for (Eigen::Index j = 0; j < dim; ++j)
    if (!(col_sq(j) > 0.0)) throw config_error("degenerate LIME design: variable " + std::to_string(j) + " has no spread");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd resid = d.f;
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    double moved = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double rho = d.x.col(j).dot(resid) / n + col_sq(j) * beta(j);
      const double mag = std::abs(rho) - cfg.l1_strength;
      const double next = mag > 0.0 ? std::copysign(mag, rho) / col_sq(j) : 0.0;
      const double change = next - beta(j);
      if (change != 0.0) {
        resid -= change * d.x.col(j);
        beta(j) = next;
      }
      moved = std::max(moved, std::abs(change));
    }
    if (moved <= cfg.cd_tol * std::max(1.0, beta.cwiseAbs().maxCoeff())) break;
  }
  return {to_vec(beta), intercept_for(d, beta, y_t), false};
}

lime_result lime0(const model& m, const vec& x_t, double y_t, const lime_config& cfg) {
  const local_design d = sample_design(m, x_t, cfg);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(d.x);
  const Eigen::VectorXd beta = cod.solve(d.f);
  return {to_vec(beta), intercept_for(d, beta, y_t), cod.rank() < d.x.cols()};
}

baylime_result baylime_distributions(const model& m, const vec& x_t, double y_t, const lime_config& cfg,
                                     double prior_eta, double noise_lambda) {
  (void)y_t;  // the constant -y_t is absorbed by the unpenalized intercept
  if (!(prior_eta > 0.0) || !(noise_lambda > 0.0)) throw config_error("BayLIME needs prior_eta > 0 and noise_lambda > 0");
  const local_design d = sample_design(m, x_t, cfg);
  const Eigen::MatrixXd xi = d.x / cfg.sampling_std;
  const Eigen::Index dim = xi.cols();
  Eigen::MatrixXd precision = noise_lambda * (xi.transpose() * xi);
  precision.diagonal().array() += prior_eta;
  const Eigen::VectorXd mean = precision.llt().solve(noise_lambda * (xi.transpose() * d.f));
  const double var = 1.0 / (prior_eta + noise_lambda * static_cast<double>(cfg.n_samples));
  return {to_vec(mean), vec(static_cast<std::size_t>(dim), var)};
}

vec integrated_gradient(const model& m, const vec& x_t, const ig_config& cfg, const gradient_source& grad) {
  const std::size_t dim = m.dimension();
  if (x_t.size() != dim) throw dimension_error(dim, x_t.size());
  if (cfg.baseline.size() != dim) throw dimension_error(dim, cfg.baseline.size());
  if (cfg.n_intervals < 1) throw config_error("IG needs at least one interval");
  vec d(dim);
  for (std::size_t i = 0; i < dim; ++i) d[i] = x_t[i] - cfg.baseline[i];
  vec acc(dim, 0.0), p(dim);
  const int n = cfg.n_intervals;
  for (int k = 0; k <= n; ++k) {
    const double a = static_cast<double>(k) / n;
    for (std::size_t i = 0; i < dim; ++i) p[i] = cfg.baseline[i] + a * d[i];
    const auto g = value_and_gradient(m, p, grad).grad;
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    for (std::size_t i = 0; i < dim; ++i) acc[i] += w * g[i];
  }
  for (std::size_t i = 0; i < dim; ++i) acc[i] *= d[i] / n;
  return acc;
}

vec expected_integrated_gradient(const model& m, const vec& x_t, const reference_set& ref, int n_intervals,
                                 const gradient_source& grad) {
  ref.validate(m.dimension());
  vec out(m.dimension(), 0.0);
  for (std::size_t j = 0; j < ref.samples.size(); ++j) {
    const double w = ref.weight(j);
    if (w == 0.0) continue;
    const vec ig = integrated_gradient(m, x_t, {ref.samples[j], n_intervals}, grad);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * ig[i];
  }
  return out;
}

bool shapley_uses_exact(std::size_t dimension, const reference_set& ref, const shapley_config& cfg) {
  if (cfg.mode == shapley_mode::exact) return true;
  if (cfg.mode == shapley_mode::sampled) return false;
  return dimension <= 10 && (std::size_t{1} << dimension) * ref.samples.size() <= 200000;
}

namespace {

vec shapley_exact(const model& m, const vec& x_t, const reference_set& ref) {
  const std::size_t dim = m.dimension();
  if (dim > 20) throw config_error("exact Shapley enumeration is limited to M <= 20");
  const std::size_t masks = std::size_t{1} << dim;
  vec value(masks, 0.0);
  vec p(dim);
  for (std::size_t s = 0; s < masks; ++s) {
    double v = 0.0;
    for (std::size_t j = 0; j < ref.samples.size(); ++j) {
      const double w = ref.weight(j);
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < dim; ++i) p[i] = (s >> i & 1U) ? x_t[i] : ref.samples[j][i];
      v += w * m.evaluate(p);
    }
    value[s] = v;
  }
  vec coef(dim);
  for (std::size_t k = 0; k < dim; ++k)
    coef[k] = std::exp(std::lgamma(k + 1.0) + std::lgamma(double(dim - k)) - std::lgamma(dim + 1.0));
  vec out(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t s = 0; s < masks; ++s) {
      if (s & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(s));
      out[i] += coef[size] * (value[s | bit] - value[s]);
    }
  }
  return out;
}

vec shapley_permutations(const model& m, const vec& x_t, const reference_set& ref, const shapley_config& cfg) {
  const std::size_t dim = m.dimension();
  std::mt19937_64 rng(cfg.seed);
  vec w(ref.samples.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = ref.weight(j);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::vector<std::size_t> order(dim);
  vec out(dim, 0.0);
  for (int c = 0; c < cfg.n_configs; ++c) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    vec p = ref.samples[pick(rng)];
    double prev = m.evaluate(p);
    for (std::size_t k : order) {
      p[k] = x_t[k];
      const double cur = m.evaluate(p);
      out[k] += cur - prev;
      prev = cur;
    }
  }
  for (auto& v : out) v /= cfg.n_configs;
  return out;
}

}  // namespace

vec shapley_sampled(const model& m, const vec& x_t, const reference_set& ref, const shapley_config& cfg) {
  if (x_t.size() != m.dimension()) throw dimension_error(m.dimension(), x_t.size());
  ref.validate(m.dimension());
  if (cfg.n_configs < 1) throw config_error("Shapley sampling needs n_configs >= 1");
  return shapley_uses_exact(m.dimension(), ref, cfg) ? shapley_exact(m, x_t, ref)
                                                     : shapley_permutations(m, x_t, ref, cfg);
}

vec z_score(const vec& x_t, const reference_set& ref) {
  const std::size_t dim = x_t.size();
  ref.validate(dim);
  if (ref.samples.size() < 2) throw config_error("Z-score needs at least two reference samples");
  vec out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < ref.samples.size(); ++j) mean += ref.weight(j) * ref.samples[j][i];
    double var = 0.0;
    for (std::size_t j = 0; j < ref.samples.size(); ++j) {
      const double d = ref.samples[j][i] - mean;
      var += ref.weight(j) * d * d;
    }
    if (!(var > 0.0)) throw config_error("Z-score undefined: variable " + std::to_string(i) + " is constant in the reference set");
    out[i] = (x_t[i] - mean) / std::sqrt(var);
  }
  return out;
}

prox_result lc(const model& m, const vec& x_t, double y_t, const lc_config& cfg, const gradient_source& grad) {
  const std::size_t dim = m.dimension();
  if (x_t.size() != dim) throw dimension_error(dim, x_t.size());
  if (!(cfg.lambda > 0.0)) throw config_error("LC lambda must be positive");
  auto shifted = [&](const vec& d) {
    vec p(x_t);
    for (std::size_t i = 0; i < dim; ++i) p[i] += d[i];
    return p;
  };
  smooth_term term;
  term.value = [&](const vec& d) {
    double sq = 0.0;
    for (double v : d) sq += v * v;
    const double r = y_t - m.evaluate(shifted(d));
    return 0.5 * cfg.eta * sq + 0.5 * cfg.lambda * r * r;
  };
  term.value_and_grad = [&](const vec& d) {
    const auto est = value_and_gradient(m, shifted(d), grad);
    const double r = y_t - est.value;
    double sq = 0.0;
    vec g(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      sq += d[i] * d[i];
      g[i] = cfg.eta * d[i] - cfg.lambda * r * est.grad[i];
    }
    return std::pair<double, vec>{0.5 * cfg.eta * sq + 0.5 * cfg.lambda * r * r, g};
  };
  prox_options opt;
  opt.eta = cfg.eta;
  opt.nu = cfg.nu;
  opt.kappa = cfg.kappa;
  opt.max_iter = cfg.max_iter;
  opt.tol = cfg.tol;
  opt.init_seed = cfg.init_seed;
  return proximal_descent(dim, term, opt);
}

}  // namespace gpattr
