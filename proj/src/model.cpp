#include "gpattr/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace gpattr {

model::model(std::size_t dimension) : dim_(dimension) {
  if (dimension == 0) throw config_error("model dimension must be positive");
}

double model::evaluate(const vec& x) const {
  if (x.size() != dim_) throw dimension_error(dim_, x.size());
  count_.fetch_add(1);
  if (concurrent_safe()) return do_evaluate(x);
  std::lock_guard<std::mutex> lock(serial_);
  return do_evaluate(x);
}

vec model::evaluate_batch(const std::vector<vec>& xs) const {
  for (const auto& x : xs)
    if (x.size() != dim_) throw dimension_error(dim_, x.size());
  count_.fetch_add(xs.size());
  if (concurrent_safe()) return do_evaluate_batch(xs);
  std::lock_guard<std::mutex> lock(serial_);
  return do_evaluate_batch(xs);
}

vec model::do_evaluate_batch(const std::vector<vec>& xs) const {
  vec out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(do_evaluate(x));
  return out;
}

namespace {

class sinusoidal_model : public model {
 public:
  sinusoidal_model() : model(2) {}
  std::optional<vec> analytic_gradient(const vec& x) const override {
    if (x.size() != 2) throw dimension_error(2, x.size());
    const double pi = std::numbers::pi;
    return vec{-2.0 * pi * std::sin(pi * x[0]) * std::cos(pi * x[1]),
               -2.0 * pi * std::cos(pi * x[0]) * std::sin(pi * x[1])};
  }

 protected:
  double do_evaluate(const vec& x) const override {
    return 2.0 * std::cos(std::numbers::pi * x[0]) * std::cos(std::numbers::pi * x[1]);
  }
};

class linear_model : public model {
 public:
  explicit linear_model(vec c) : model(c.size()), c_(std::move(c)) {}
  std::optional<vec> analytic_gradient(const vec& x) const override {
    if (x.size() != c_.size()) throw dimension_error(c_.size(), x.size());
    return c_;
  }

 protected:
  double do_evaluate(const vec& x) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i) s += c_[i] * x[i];
    return s;
  }

 private:
  vec c_;
};

class quadratic_model : public model {
 public:
  quadratic_model(std::size_t dim, vec a, vec b) : model(dim), a_(std::move(a)), b_(std::move(b)) {
    if (b_.empty()) b_.assign(dim, 0.0);
  }
  std::optional<vec> analytic_gradient(const vec& x) const override {
    const std::size_t n = dimension();
    if (x.size() != n) throw dimension_error(n, x.size());
    vec g(b_);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i] += (a_[i * n + j] + a_[j * n + i]) * x[j];
    return g;
  }

 protected:
  double do_evaluate(const vec& x) const override {
    const std::size_t n = dimension();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += a_[i * n + j] * x[j];
      s += x[i] * row + b_[i] * x[i];
    }
    return s;
  }

 private:
  vec a_, b_;
};

}  // namespace

vec parse_number_list(const std::string& text) {
  vec out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw config_error("not a number in list: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw config_error("not a number in list: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

builtin_spec parse_builtin_spec(const std::string& text) {
  builtin_spec spec;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "sinusoidal2d") {
    spec.kind = builtin_kind::sinusoidal2d;
    if (!rest.empty()) throw config_error("sinusoidal2d takes no coefficients");
  } else if (kind == "linear") {
    spec.kind = builtin_kind::linear;
    spec.coefficients = parse_number_list(rest);
  } else if (kind == "quadratic") {
    spec.kind = builtin_kind::quadratic;
    const auto bar = rest.find('|');
    spec.coefficients = parse_number_list(rest.substr(0, bar));
    if (bar != std::string::npos) spec.linear = parse_number_list(rest.substr(bar + 1));
  } else {
    throw config_error("unknown builtin model '" + kind + "'");
  }
  return spec;
}

std::unique_ptr<model> make_builtin(const builtin_spec& spec) {
  switch (spec.kind) {
    case builtin_kind::sinusoidal2d:
      return std::make_unique<sinusoidal_model>();
    case builtin_kind::linear:
      if (spec.coefficients.empty()) throw config_error("linear model needs coefficients");
      return std::make_unique<linear_model>(spec.coefficients);
    case builtin_kind::quadratic: {
      const auto n = static_cast<std::size_t>(std::llround(std::sqrt(double(spec.coefficients.size()))));
      if (n == 0 || n * n != spec.coefficients.size())
        throw config_error("quadratic model needs a square coefficient matrix (M*M values)");
      if (!spec.linear.empty() && spec.linear.size() != n)
        throw config_error("quadratic linear term must have M values");
      return std::make_unique<quadratic_model>(n, spec.coefficients, spec.linear);
    }
  }
  throw config_error("unknown builtin model");
}

function_model::function_model(std::size_t dimension, fn f, grad_fn g)
    : model(dimension), f_(std::move(f)), g_(std::move(g)) {}

double function_model::do_evaluate(const vec& x) const { return f_(x); }

std::optional<vec> function_model::analytic_gradient(const vec& x) const {
  if (!g_) return std::nullopt;
  return g_(x);
}

standardized_model::standardized_model(const model& inner, vec mean, vec scale)
    : model(inner.dimension()), inner_(inner), mean_(std::move(mean)), scale_(std::move(scale)) {
  if (mean_.size() != dimension() || scale_.size() != dimension())
    throw dimension_error(dimension(), mean_.size() != dimension() ? mean_.size() : scale_.size());
}

vec standardized_model::raw(const vec& z) const {
  vec x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = mean_[i] + scale_[i] * z[i];
  return x;
}

double standardized_model::do_evaluate(const vec& z) const { return inner_.evaluate(raw(z)); }

std::optional<vec> standardized_model::analytic_gradient(const vec& z) const {
  auto g = inner_.analytic_gradient(raw(z));
  if (!g) return g;
  for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] *= scale_[i];
  return g;
}

}  // namespace gpattr
