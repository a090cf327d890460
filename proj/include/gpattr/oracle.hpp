#pragma once
#include <array>

namespace gpattr::oracle {

using pair = std::array<double, 2>;

// Closed forms for f(x) = 2 cos(pi x1) cos(pi x2).
double sinusoid(const pair& x);

pair lime0(const pair& x_t);

// Requires x2 = 0, x1 > 0 and |y| < 2; throws config_error otherwise.
pair gpa(const pair& x_t, double y_t);

// Requires d1 != +-d2 where d = x_t - x0; throws config_error on a singular path.
pair ig(const pair& x_t, const pair& x_0);

// Uniform reference over [-m, m]^2 with integer m.
pair sv(const pair& x_t);

}  // namespace gpattr::oracle
