#pragma once
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gpattr/errors.hpp"

namespace gpattr {

using vec = std::vector<double>;

// Query-only handle to f: R^M -> R.
class model {
 public:
  explicit model(std::size_t dimension);
  virtual ~model() = default;
  model(const model&) = delete;
  model& operator=(const model&) = delete;

  std::size_t dimension() const { return dim_; }

  double evaluate(const vec& x) const;
  vec evaluate_batch(const std::vector<vec>& xs) const;

  std::uint64_t query_count() const { return count_.load(); }

  // false means callers must not query concurrently; evaluate() then serializes internally.
  virtual bool concurrent_safe() const { return true; }

  // Closed-form gradient when the model has one (builtins only).
  virtual std::optional<vec> analytic_gradient(const vec&) const { return std::nullopt; }

 protected:
  virtual double do_evaluate(const vec& x) const = 0;
  virtual vec do_evaluate_batch(const std::vector<vec>& xs) const;

 private:
  std::size_t dim_;
  mutable std::atomic<std::uint64_t> count_{0};
  mutable std::mutex serial_;
};

enum class builtin_kind { sinusoidal2d, linear, quadratic };

// linear: f = c.x with c = coefficients.
// quadratic: f = x^T A x + b.x with A = coefficients (row-major, M*M) and b = linear (empty means 0).
struct builtin_spec {
  builtin_kind kind = builtin_kind::sinusoidal2d;
  vec coefficients;
  vec linear;
};

// "1,2.5,-3" -> {1, 2.5, -3}
vec parse_number_list(const std::string& text);

// "sinusoidal2d", "linear:3,-1", "quadratic:1,0,0,1" or "quadratic:1,0,0,1|0.5,0"
builtin_spec parse_builtin_spec(const std::string& text);
std::unique_ptr<model> make_builtin(const builtin_spec& spec);

class function_model : public model {
 public:
  using fn = std::function<double(const vec&)>;
  using grad_fn = std::function<vec(const vec&)>;
  function_model(std::size_t dimension, fn f, grad_fn g = {});
  std::optional<vec> analytic_gradient(const vec& x) const override;

 protected:
  double do_evaluate(const vec& x) const override;

 private:
  fn f_;
  grad_fn g_;
};

// Evaluates an inner model in raw units: f(mean + scale * z).
class standardized_model : public model {
 public:
  standardized_model(const model& inner, vec mean, vec scale);
  bool concurrent_safe() const override { return inner_.concurrent_safe(); }
  std::optional<vec> analytic_gradient(const vec& z) const override;

 protected:
  double do_evaluate(const vec& z) const override;

 private:
  vec raw(const vec& z) const;
  const model& inner_;
  vec mean_, scale_;
};

// Newline-delimited JSON over a child's stdin/stdout: {"x":[...]} -> {"y":v}.
class subprocess_model : public model {
 public:
  subprocess_model(std::size_t dimension, std::string command, double timeout_s = 30.0);
  ~subprocess_model() override;
  bool concurrent_safe() const override { return false; }

 protected:
  double do_evaluate(const vec& x) const override;

 private:
  void start() const;
  void stop() const;
  std::optional<std::string> round_trip(const std::string& line) const;

  std::string command_;
  double timeout_s_;
  mutable int pid_ = -1;
  mutable int to_child_ = -1;
  mutable int from_child_ = -1;
  mutable std::string buffer_;
  mutable std::map<vec, double> cache_;
};

// POST {base}/predict with {"x":[...]} -> {"y":v}; batch {"xs":...} -> {"ys":...} when
// GET {base}/capabilities reports {"batch": true}.
class http_model : public model {
 public:
  http_model(std::size_t dimension, std::string base_url, double timeout_s = 30.0);
  ~http_model() override;
  bool concurrent_safe() const override { return false; }
  bool supports_batch() const;

 protected:
  double do_evaluate(const vec& x) const override;
  vec do_evaluate_batch(const std::vector<vec>& xs) const override;

 private:
  struct impl;
  std::unique_ptr<impl> p_;
};

}  // namespace gpattr
