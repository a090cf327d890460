#include "gpattr/oracle.hpp"

#include <cmath>
#include <numbers>

#include "gpattr/errors.hpp"

namespace gpattr::oracle {

namespace {
constexpr double pi = std::numbers::pi;
}

double sinusoid(const pair& x) { return 2.0 * std::cos(pi * x[0]) * std::cos(pi * x[1]); }

pair lime0(const pair& x) {
  return {-2.0 * pi * std::sin(pi * x[0]) * std::cos(pi * x[1]),
          -2.0 * pi * std::cos(pi * x[0]) * std::sin(pi * x[1])};
}

pair gpa(const pair& x_t, double y_t) {
  if (x_t[1] != 0.0) throw config_error("GPA closed form requires x2 = 0");
  if (!(x_t[0] > 0.0)) throw config_error("GPA closed form requires x1 > 0");
  if (!(std::abs(y_t) < 2.0)) throw config_error("GPA closed form requires |y| < 2 (arccos domain)");
  return {std::acos(y_t / 2.0) / pi - x_t[0], 0.0};
}

pair ig(const pair& x_t, const pair& x_0) {
  const double d1 = x_t[0] - x_0[0];
  const double d2 = x_t[1] - x_0[1];
  const double sum = d1 + d2, diff = d1 - d2;
  if (sum == 0.0 || diff == 0.0)
    throw config_error("IG closed form is singular when d1 = +-d2; use numeric quadrature instead");
  const double gt = std::cos(pi * (x_t[0] + x_t[1])) / sum;
  const double g0 = std::cos(pi * (x_0[0] + x_0[1])) / sum;
  const double ht = std::cos(pi * (x_t[0] - x_t[1])) / diff;
  const double h0 = std::cos(pi * (x_0[0] - x_0[1])) / diff;
  return {d1 * (gt - g0 + (ht - h0)), d2 * (gt - g0 - (ht - h0))};
}

pair sv(const pair& x_t) {
  const double f = sinusoid(x_t);
  return {f / 2.0, f / 2.0};
}

}  // namespace gpattr::oracle
