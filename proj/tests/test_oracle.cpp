#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gpattr/baselines.hpp"
#include "gpattr/oracle.hpp"

using namespace gpattr;

namespace {
const double pi = std::numbers::pi;
}

TEST(OracleLime0, Examples) {
  const auto a = oracle::lime0({0.5, 0.0});
  EXPECT_DOUBLE_EQ(a[0], -2.0 * pi);
  EXPECT_NEAR(a[1], 0.0, 1e-15);
  EXPECT_EQ(oracle::lime0({0.0, 0.0}), (oracle::pair{-0.0, -0.0}));
  const auto c = oracle::lime0({0.25, 0.25});
  EXPECT_NEAR(c[0], -pi, 1e-14);
  EXPECT_NEAR(c[1], -pi, 1e-14);
}

TEST(OracleGpa, PointsACB) {
  const auto a = oracle::gpa({0.5, 0.0}, 1.0);
  EXPECT_NEAR(a[0], -1.0 / 6.0, 1e-15);
  EXPECT_EQ(a[1], 0.0);
  EXPECT_NEAR(oracle::gpa({0.5, 0.0}, 0.0)[0], 0.0, 1e-15);
  EXPECT_NEAR(oracle::gpa({0.5, 0.0}, -1.0)[0], 1.0 / 6.0, 1e-15);
}

TEST(OracleGpa, ZeroesTheResidual) {
  for (double y : {-1.9, -0.3, 0.0, 0.8, 1.99}) {
    const oracle::pair x{0.37, 0.0};
    const auto d = oracle::gpa(x, y);
    EXPECT_NEAR(oracle::sinusoid({x[0] + d[0], 0.0}), y, 1e-12);
  }
}

TEST(OracleGpa, RefusesOutsideRegime) {
  EXPECT_THROW(oracle::gpa({0.5, 0.1}, 1.0), config_error);
  EXPECT_THROW(oracle::gpa({-0.5, 0.0}, 1.0), config_error);
  EXPECT_THROW(oracle::gpa({0.0, 0.0}, 1.0), config_error);
  EXPECT_THROW(oracle::gpa({0.5, 0.0}, 2.0), config_error);
  EXPECT_THROW(oracle::gpa({0.5, 0.0}, -2.5), config_error);
}

TEST(OracleIg, Examples) {
  const auto a = oracle::ig({0.5, 0.0}, {0.0, 0.0});
  EXPECT_NEAR(a[0], -2.0, 1e-14);
  EXPECT_NEAR(a[1], 0.0, 1e-14);
  const auto b = oracle::ig({0.5, 0.0}, {0.0, 1.0});
  EXPECT_NEAR(b[0], -2.0 / 3.0, 1e-14);
  EXPECT_NEAR(b[1], 8.0 / 3.0, 1e-14);
}

TEST(OracleIg, SingularPath) {
  EXPECT_THROW(oracle::ig({0.5, 0.5}, {0.0, 0.0}), config_error);
  EXPECT_THROW(oracle::ig({0.5, -0.5}, {0.0, 0.0}), config_error);
}

TEST(OracleIg, SumRuleOnThousandPairs) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const oracle::pair x{u(rng), u(rng)}, x0{u(rng), u(rng)};
    const auto ig = oracle::ig(x, x0);
    EXPECT_NEAR(ig[0] + ig[1], oracle::sinusoid(x) - oracle::sinusoid(x0), 1e-12) << k;
  }
}

TEST(OracleIg, MatchesNumericQuadrature) {
  auto m = make_builtin(parse_builtin_spec("sinusoidal2d"));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const oracle::pair x{u(rng), u(rng)}, x0{u(rng), u(rng)};
    const auto exact = oracle::ig(x, x0);
    const auto num = integrated_gradient(*m, {x[0], x[1]}, {{x0[0], x0[1]}, 400}, gradient_source::closed_form());
    EXPECT_NEAR(num[0], exact[0], 1e-3) << k;
    EXPECT_NEAR(num[1], exact[1], 1e-3) << k;
  }
}

TEST(OracleSv, Examples) {
  EXPECT_NEAR(oracle::sv({0.5, 0.0})[0], 0.0, 1e-15);
  EXPECT_EQ(oracle::sv({0.0, 0.0}), (oracle::pair{1.0, 1.0}));
  EXPECT_EQ(oracle::sv({1.0, 0.0}), (oracle::pair{-1.0, -1.0}));
}
