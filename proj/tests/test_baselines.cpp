#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "gpattr/baselines.hpp"
#include "gpattr/gpa.hpp"

using namespace gpattr;

namespace {

const double pi = std::numbers::pi;

std::unique_ptr<model> sinusoid() { return make_builtin(parse_builtin_spec("sinusoidal2d")); }

// Periodic grid on [-1, 1): sum_k cos(pi z_k) = 0 exactly in exact arithmetic.
reference_set periodic_grid(int n) {
  reference_set ref;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) ref.samples.push_back({-1.0 + 2.0 * a / n, -1.0 + 2.0 * b / n});
  return ref;
}

double sum(const vec& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

lime_config tight_lime(int n = 1000, double std = 1e-3) {
  lime_config cfg;
  cfg.n_samples = n;
  cfg.sampling_std = std;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

TEST(Lime, LinearModelRecoversCoefficients) {
  auto m = make_builtin(parse_builtin_spec("linear:3,-1,0.5"));
  lime_config cfg;
  cfg.seed = 3;
  const auto l0 = lime0(*m, {1.0, 2.0, -1.0}, 4.0, cfg);
  EXPECT_NEAR(l0.beta[0], 3.0, 1e-10);
  EXPECT_NEAR(l0.beta[1], -1.0, 1e-10);
  EXPECT_NEAR(l0.beta[2], 0.5, 1e-10);
  EXPECT_FALSE(l0.rank_deficient);
  const auto l = lime(*m, {1.0, 2.0, -1.0}, 4.0, cfg);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(l.beta[i], l0.beta[i], 1e-9);
}

TEST(Lime, SinusoidPointAIsMinusTwoPi) {
  auto m = sinusoid();
  const auto l0 = lime0(*m, {0.5, 0.0}, 1.0, tight_lime());
  EXPECT_NEAR(l0.beta[0], -2.0 * pi, 1e-2);
  EXPECT_NEAR(l0.beta[1], 0.0, 1e-2);
  const auto l = lime(*m, {0.5, 0.0}, 1.0, tight_lime());
  EXPECT_NEAR(l.beta[0], -2.0 * pi, 1e-2);
}

TEST(Lime, L1PenaltyShrinksAndZeroes) {
  auto m = make_builtin(parse_builtin_spec("linear:3,0.05"));
  lime_config cfg;
  cfg.l1_strength = 0.01;
  const auto l = lime(*m, {0.0, 0.0}, 0.0, cfg);
  EXPECT_EQ(l.beta[1], 0.0);
  EXPECT_GT(l.beta[0], 2.5);
  EXPECT_LT(l.beta[0], 3.0);
}

TEST(Lime, QuadraticSlopeIsTangent) {
  // Least-squares slope of (1 + e)^2 on e is 2 + S3/S2 with sample moments of e; the
  // third-moment term has standard deviation sqrt(15) sigma / sqrt(n).
  auto m = make_builtin(parse_builtin_spec("quadratic:1"));
  const int n = 100000;
  const double s = 0.3;
  const auto l0 = lime0(*m, {1.0}, 0.0, tight_lime(n, s));
  EXPECT_NEAR(l0.beta[0], 2.0, 3.0 * std::sqrt(15.0) * s / std::sqrt(double(n)));
}

TEST(Lime, InvalidConfig) {
  auto m = sinusoid();
  lime_config cfg;
  cfg.n_samples = 2;
  EXPECT_THROW(lime(*m, {0.0, 0.0}, 0.0, cfg), config_error);
  cfg = lime_config{};
  cfg.sampling_std = 0.0;
  EXPECT_THROW(lime0(*m, {0.0, 0.0}, 0.0, cfg), config_error);
}

TEST(BayLime, VarianceClosedForm) {
  auto m = sinusoid();
  lime_config cfg;
  cfg.n_samples = 10;
  const auto r = baylime_distributions(*m, {0.5, 0.0}, 1.0, cfg, 0.1, 1.0);
  ASSERT_EQ(r.variance.size(), 2u);
  for (double v : r.variance) EXPECT_NEAR(v, 0.099009900990099, 1e-10);
  const auto prior_only = baylime_distributions(*m, {0.5, 0.0}, 1.0, cfg, 0.1, 1e-12);
  EXPECT_NEAR(prior_only.variance[0], 10.0, 1e-8);
  cfg.n_samples = 100000;
  const auto many = baylime_distributions(*m, {0.5, 0.0}, 1.0, cfg, 0.1, 1.0);
  EXPECT_LT(many.variance[0], 1e-4);
}

TEST(BayLime, MeanApproachesScaledGradient) {
  // xi = (x - x_t) / sampling_std, so the mean estimates sampling_std * grad f.
  auto m = sinusoid();
  const auto r = baylime_distributions(*m, {0.5, 0.0}, 1.0, tight_lime(), 1e-6, 1.0);
  EXPECT_NEAR(r.mean[0] / 1e-3, -2.0 * pi, 1e-2);
}

TEST(IntegratedGradient, SinusoidClosedForms) {
  auto m = sinusoid();
  const auto a = integrated_gradient(*m, {0.5, 0.0}, {{0.0, 0.0}, 100}, gradient_source::closed_form());
  EXPECT_NEAR(a[0], -2.0, 1e-3);
  EXPECT_NEAR(a[1], 0.0, 1e-3);
  const auto b = integrated_gradient(*m, {0.5, 0.0}, {{0.0, 1.0}, 100}, gradient_source::closed_form());
  EXPECT_NEAR(b[0], -2.0 / 3.0, 1e-3);
  EXPECT_NEAR(b[1], 8.0 / 3.0, 1e-3);
}

TEST(IntegratedGradient, LinearExact) {
  auto m = make_builtin(parse_builtin_spec("linear:3,-1"));
  const auto ig = integrated_gradient(*m, {1.0, 2.0}, {{-1.0, 0.5}, 7}, gradient_source::monte_carlo({1.0, 3, 0}));
  EXPECT_NEAR(ig[0], 2.0 * 3.0, 1e-12);
  EXPECT_NEAR(ig[1], 1.5 * -1.0, 1e-12);
}

TEST(IntegratedGradient, SumRuleWithinQuadratureError) {
  auto m = sinusoid();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const vec x{u(rng), u(rng)}, x0{u(rng), u(rng)};
    const auto ig = integrated_gradient(*m, x, {x0, 100}, gradient_source::closed_form());
    EXPECT_NEAR(sum(ig), m->evaluate(x) - m->evaluate(x0), 1e-3);
  }
}

TEST(IntegratedGradient, RejectsBadInput) {
  auto m = sinusoid();
  EXPECT_THROW(integrated_gradient(*m, {0.0, 0.0}, {{0.0}, 10}, gradient_source::closed_form()), dimension_error);
  EXPECT_THROW(integrated_gradient(*m, {0.0, 0.0}, {{0.0, 0.0}, 0}, gradient_source::closed_form()), config_error);
}

TEST(ExpectedIntegratedGradient, SelfReferenceIsZero) {
  auto m = sinusoid();
  reference_set ref{{{0.3, -0.4}}, {}};
  const auto e = expected_integrated_gradient(*m, {0.3, -0.4}, ref, 100, gradient_source::closed_form());
  EXPECT_EQ(e, (vec{0.0, 0.0}));
}

TEST(ExpectedIntegratedGradient, LinearIsShiftFromReferenceMean) {
  auto m = make_builtin(parse_builtin_spec("linear:2,-3"));
  reference_set ref{{{0.0, 1.0}, {2.0, -1.0}, {1.0, 3.0}}, {}};
  const auto e = expected_integrated_gradient(*m, {4.0, 0.5}, ref, 5, gradient_source::closed_form());
  EXPECT_NEAR(e[0], 4.0 * 2.0 - 1.0 * 2.0, 1e-12);
  EXPECT_NEAR(e[1], 0.5 * -3.0 - 1.0 * -3.0, 1e-12);
}

TEST(ExpectedIntegratedGradient, WeightedSumRule) {
  auto m = sinusoid();
  reference_set ref{{{0.1, 0.2}, {-0.5, 0.7}, {0.9, -0.3}}, {0.5, 0.25, 0.25}};
  const vec x{0.4, -0.6};
  const auto e = expected_integrated_gradient(*m, x, ref, 100, gradient_source::closed_form());
  double mean_f = 0.0;
  for (std::size_t j = 0; j < 3; ++j) mean_f += ref.weights[j] * m->evaluate(ref.samples[j]);
  EXPECT_NEAR(sum(e), m->evaluate(x) - mean_f, 1e-3);
}

TEST(ExpectedIntegratedGradient, EmptyReference) {
  auto m = sinusoid();
  EXPECT_THROW(expected_integrated_gradient(*m, {0.0, 0.0}, {}, 100, gradient_source::closed_form()), config_error);
}

TEST(Shapley, ConstantModelGivesZero) {
  function_model m(3, [](const vec&) { return 4.2; });
  reference_set ref{{{0.0, 1.0, 2.0}, {3.0, 4.0, 5.0}}, {}};
  EXPECT_EQ(shapley_sampled(m, {1.0, 1.0, 1.0}, ref, {}), (vec{0.0, 0.0, 0.0}));
  EXPECT_EQ(shapley_sampled(m, {1.0, 1.0, 1.0}, ref, {50, 1, shapley_mode::sampled}), (vec{0.0, 0.0, 0.0}));
}

TEST(Shapley, AdditiveModelBruteForce) {
  auto g1 = [](double v) { return std::sin(v); };
  auto g2 = [](double v) { return v * v * v; };
  function_model m(2, [&](const vec& x) { return g1(x[0]) + g2(x[1]); });
  reference_set ref{{{0.0, 1.0}, {0.5, -2.0}, {-1.0, 0.25}}, {}};
  const vec x{1.2, 0.7};
  // Both orderings averaged by hand: for additive f each ordering gives g_i(x_i) - g_i(z_i).
  double m1 = 0.0, m2 = 0.0;
  for (const auto& z : ref.samples) {
    m1 += g1(z[0]) / 3.0;
    m2 += g2(z[1]) / 3.0;
  }
  const auto sv = shapley_sampled(m, x, ref, {});
  EXPECT_NEAR(sv[0], g1(x[0]) - m1, 1e-12);
  EXPECT_NEAR(sv[1], g2(x[1]) - m2, 1e-12);
}

TEST(Shapley, SinusoidUniformReferenceSplitsEvenly) {
  auto m = sinusoid();
  const auto ref = periodic_grid(20);
  for (const vec& x : {vec{0.5, 0.0}, vec{0.0, 0.0}, vec{1.0, 0.0}, vec{0.3, -0.8}}) {
    const auto sv = shapley_sampled(*m, x, ref, {});
    const double half = m->evaluate(x) / 2.0;
    EXPECT_NEAR(sv[0], half, 1e-12);
    EXPECT_NEAR(sv[1], half, 1e-12);
  }
}

TEST(Shapley, SampledSymmetricWithinMonteCarloError) {
  auto m = sinusoid();
  const auto ref = periodic_grid(20);
  const int n = 20000;
  // Each per-configuration contribution lies in [-4, 4].
  const double tol = 5.0 * 4.0 * std::sqrt(2.0) / std::sqrt(double(n));
  for (const vec& x : {vec{0.5, 0.0}, vec{0.2, 0.7}}) {
    const auto sv = shapley_sampled(*m, x, ref, {n, 9, shapley_mode::sampled});
    EXPECT_NEAR(sv[0], sv[1], tol);
    EXPECT_NEAR(sv[0] + sv[1], m->evaluate(x), tol);
  }
}

TEST(Shapley, QuadraticSumRuleAndEqualityWithEig) {
  auto m = make_builtin(parse_builtin_spec("quadratic:1,0.5,-0.3,0.2,-1,0.7,0,0.4,2|0.1,-0.2,0.3"));
  reference_set ref{{{0.1, -0.2, 0.3}, {1.0, 0.5, -0.5}, {-0.7, 0.2, 0.9}, {0.4, -1.1, 0.0}, {0.0, 0.8, -0.6}}, {}};
  const vec x{0.6, -0.4, 1.1};
  const auto sv = shapley_sampled(*m, x, ref, {});
  const auto eig = expected_integrated_gradient(*m, x, ref, 100, gradient_source::closed_form());
  double mean_f = 0.0;
  for (const auto& z : ref.samples) mean_f += m->evaluate(z) / 5.0;
  EXPECT_NEAR(sum(sv), m->evaluate(x) - mean_f, 1e-8);
  EXPECT_NEAR(sum(eig), m->evaluate(x) - mean_f, 1e-8);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(sv[i], eig[i], 1e-6);
}

TEST(Shapley, ExactThreshold) {
  reference_set small{std::vector<vec>(10, vec(3, 0.0)), {}};
  EXPECT_TRUE(shapley_uses_exact(3, small, {}));
  EXPECT_FALSE(shapley_uses_exact(11, small, {}));
  reference_set big{std::vector<vec>(1000, vec(8, 0.0)), {}};
  EXPECT_FALSE(shapley_uses_exact(8, big, {}));
  EXPECT_TRUE(shapley_uses_exact(8, big, {100, 0, shapley_mode::exact}));
}

TEST(ZScore, Examples) {
  reference_set ref{{{1.0}, {5.0}}, {}};
  EXPECT_DOUBLE_EQ(z_score({5.0}, ref)[0], 1.0);
  reference_set two{{{0.0, 0.0}, {2.0, 2.0}}, {}};
  EXPECT_EQ(z_score({2.0, 2.0}, two), (vec{1.0, 1.0}));
  EXPECT_EQ(z_score({1.0, 1.0}, two), (vec{0.0, 0.0}));
}

TEST(ZScore, ConstantVariableNamed) {
  reference_set ref{{{0.0, 3.0}, {2.0, 3.0}}, {}};
  try {
    z_score({1.0, 1.0}, ref);
    FAIL() << "expected config_error";
  } catch (const config_error& e) {
    EXPECT_NE(std::string(e.what()).find("variable 1"), std::string::npos);
  }
}

TEST(ReferenceSet, WeightsValidated) {
  reference_set bad{{{0.0}, {1.0}}, {0.7, 0.7}};
  EXPECT_THROW(bad.validate(1), config_error);
  reference_set neg{{{0.0}, {1.0}}, {1.5, -0.5}};
  EXPECT_THROW(neg.validate(1), config_error);
  reference_set wrong{{{0.0, 1.0}}, {}};
  EXPECT_THROW(wrong.validate(1), dimension_error);
}

TEST(Lc, PointAMatchesClosedForm) {
  auto m = sinusoid();
  const auto r = lc(*m, {0.5, 0.0}, 1.0, {}, gradient_source::closed_form());
  EXPECT_NEAR(r.delta[0], -1.0 / 6.0, 1e-3);
  EXPECT_NEAR(r.delta[1], 0.0, 1e-3);
}

TEST(Lc, ZeroResidualStaysAtZero) {
  auto m = sinusoid();
  const auto r = lc(*m, {0.3, 0.2}, m->evaluate({0.3, 0.2}), {}, gradient_source::closed_form());
  EXPECT_EQ(r.delta, (vec{0.0, 0.0}));
}

TEST(Lc, LinearScalarClosedForm) {
  // Fixed point of the update on f = c x: eta d - lambda c (y - c(x + d)) + (eta nu / kappa) sign(d) = 0.
  auto m = make_builtin(parse_builtin_spec("linear:2"));
  lc_config cfg;
  cfg.tol = 1e-12;
  const double c = 2.0, x = 1.0, y = 5.0;
  const auto r = lc(*m, {x}, y, cfg, gradient_source::closed_form());
  const double w = cfg.eta * cfg.nu / cfg.kappa;
  EXPECT_NEAR(r.delta[0], (cfg.lambda * c * (y - c * x) - w) / (cfg.eta + cfg.lambda * c * c), 1e-9);
  EXPECT_NEAR(r.delta[0], (y - c * x) / c, 1e-3);
}

TEST(DeviationAgnostic, BaselinesBitIdenticalUnderShift) {
  auto m = sinusoid();
  const vec x{0.5, 0.0};
  const double y = 1.0;
  const reference_set ref = periodic_grid(6);
  lime_config cfg;
  cfg.seed = 23;
  cfg.l1_strength = 0.01;
  auto all = [&](double yy) {
    std::vector<vec> out;
    out.push_back(lime(*m, x, yy, cfg).beta);
    out.push_back(lime0(*m, x, yy, cfg).beta);
    out.push_back(integrated_gradient(*m, x, {{0.0, 1.0}, 100}, gradient_source::monte_carlo({1.0, 10, 4})));
    out.push_back(expected_integrated_gradient(*m, x, ref, 20, gradient_source::monte_carlo({1.0, 10, 4})));
    out.push_back(shapley_sampled(*m, x, ref, {100, 8, shapley_mode::sampled}));
    out.push_back(shapley_sampled(*m, x, ref, {}));
    out.push_back(z_score(x, ref));
    out.push_back(baylime_distributions(*m, x, yy, cfg, 0.1, 1.0).mean);
    return out;
  };
  const auto base = all(y);
  for (double shift : {1.0, -1.0, 10.0, -10.0}) {
    const auto moved = all(y + shift);
    for (std::size_t k = 0; k < base.size(); ++k) EXPECT_EQ(base[k], moved[k]) << "method " << k << " shift " << shift;
  }
}

TEST(DeviationAgnostic, GpaAndLcAreNot) {
  auto m = sinusoid();
  gpa_hyperparams hp;
  hp.eta = 1e-3;
  hp.nu = 1e-3;
  hp.a0 = 1.0;
  hp.b0 = 1.0;
  auto one = [](vec x, double y) {
    test_set ts;
    ts.samples.push_back({std::move(x), y});
    return ts;
  };
  const auto a = map_estimate(one({0.5, 0.0}, 1.0), *m, hp, gradient_source::closed_form());
  const auto c = map_estimate(one({0.5, 0.0}, 0.0), *m, hp, gradient_source::closed_form());
  EXPECT_GE(std::abs(a.delta_star[0] - c.delta_star[0]), 0.1);
  const auto la = lc(*m, {0.5, 0.0}, 1.0, {}, gradient_source::closed_form());
  const auto lcc = lc(*m, {0.5, 0.0}, 0.0, {}, gradient_source::closed_form());
  EXPECT_GE(std::abs(la.delta[0] - lcc.delta[0]), 0.1);
}

TEST(ShortPathIg, DerivativeMatchesLime0) {
  auto m = sinusoid();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
  const double eps = 1e-5;
  for (int k = 0; k < 20; ++k) {
    const vec x{u(rng), u(rng)};
    const double a = angle(rng);
    const vec x0{x[0] - 1e-3 * std::cos(a), x[1] - 1e-3 * std::sin(a)};
    lime_config cfg = tight_lime();
    cfg.seed = static_cast<std::uint64_t>(k);
    const auto l0 = lime0(*m, x, 0.0, cfg);
    for (std::size_t i = 0; i < 2; ++i) {
      vec up(x), down(x);
      up[i] += eps;
      down[i] -= eps;
      const double d = (integrated_gradient(*m, up, {x0, 100}, gradient_source::closed_form())[i] -
                        integrated_gradient(*m, down, {x0, 100}, gradient_source::closed_form())[i]) /
                       (2.0 * eps);
      EXPECT_NEAR(d, l0.beta[i], 1e-2) << "point " << k << " coordinate " << i;
    }
  }
}
