#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "morrey/ball_integration.hpp"
#include "morrey/parallel.hpp"
#include "test_support.hpp"

using namespace morrey;

namespace {

const IntegrationSettings kSettings{};

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Centered, Examples) {
  const auto v = integrate_abs_pow_centered(RadialFunction::power(1.0, -0.5), 1.0, 1.0, 1);
  EXPECT_FALSE(v.infinite);
  EXPECT_NEAR(v.value, 4.0, 1e-14);
  EXPECT_TRUE(integrate_abs_pow_centered(RadialFunction::power(1.0, -1.0), 1.0, 3.0, 1).infinite);
  EXPECT_NEAR(integrate_abs_pow_centered(RadialFunction::power(1.0, -1.0), 1.0, 1.0, 2).value, 2 * std::numbers::pi,
              1e-13);
}

TEST(Centered, CrossCheckedByQuadrature) {
  // 2 \int_0^1 t^{-1/2} dt by substitution t = u^2 and Gauss-Kronrod.
  const auto rule = detail::gauss_kronrod_15([](double u) { return 2.0 * std::pow(u * u, -0.5) * 2.0 * u; }, 0.0, 1.0);
  EXPECT_NEAR(rule.value, integrate_abs_pow_centered(RadialFunction::power(1.0, -0.5), 1.0, 1.0, 1).value, 1e-13);
}

TEST(Ball, OneDimensionalOffCenter) {
  const auto v = integrate_abs_pow_ball(RadialFunction::power(1.0, -0.5), 1.0, {2.0, 1.0}, 1, kSettings);
  EXPECT_NEAR(v.value, 2.0 * (std::sqrt(3.0) - 1.0), 1e-14);
}

TEST(Ball, ConstantFunctionGivesVolume) {
  for (int n = 1; n <= 6; ++n) {
    for (const Ball& b : {Ball{0.0, 1.0}, Ball{0.4, 1.0}, Ball{1.0, 1.0}, Ball{3.0, 0.5}, Ball{0.1, 7.0}}) {
      const auto v = integrate_abs_pow_ball(RadialFunction::power(-1.5, 0.0), 2.0, b, n, kSettings);
      const double expected = 2.25 * VolumeConstants(n).ball_volume(b.r);
      EXPECT_LT(rel_diff(v.value, expected), 1e-9) << "n=" << n << " d=" << b.d << " r=" << b.r;
      EXPECT_TRUE(v.tolerance_met);
    }
  }
}

// Values from tests/oracles/compute_expected.py (scipy, ball-centred polar coordinates).
TEST(Ball, MatchesIndependentOracle) {
  struct Case {
    std::vector<Piece> pieces;
    double p;
    Ball ball;
    int n;
    double expected;
  };
  const std::vector<Case> cases = {
      {{{0, kInf, 1.0, -0.5}}, 1.0, {1.5, 1.0}, 2, 2.60587336098888},
      {{{0, kInf, 1.0, -0.5}}, 1.0, {0.5, 1.0}, 2, 3.98826626375972},
      {{{0.5, 2.0, 2.0, -1.0}}, 2.0, {1.0, 1.2}, 3, 21.8022699790227},
      {{{0.3, kInf, 1.0, -1.0}}, 1.0, {1.0, 0.8}, 4, 1.90059030182935},
      {{{0.2, 0.7, 1.5, -0.5}, {0.7, kInf, -0.5, -2.0}}, 1.5, {0.9, 1.1}, 5, 3.23674243350442},
  };
  for (const Case& c : cases) {
    const auto v = integrate_abs_pow_ball(RadialFunction::canonicalize(c.pieces), c.p, c.ball, c.n, kSettings);
    EXPECT_LT(rel_diff(v.value, c.expected), 1e-9) << "n=" << c.n << " got " << v.value;
    EXPECT_TRUE(v.tolerance_met);
  }
}

TEST(Ball, BoundaryThroughOrigin) {
  // d == r: the origin sits on the sphere; integrable singularity at t = 0.
  for (int n : {2, 3, 5}) {
    const auto f = RadialFunction::power(1.0, -0.5 * n);
    const auto v = integrate_abs_pow_ball(f, 1.5, {1.0, 1.0}, n, kSettings);
    EXPECT_FALSE(v.infinite);
    EXPECT_TRUE(v.tolerance_met);
    EXPECT_GT(v.value, 0.0);
    // Bounded above by the centered ball of radius 2 that contains it.
    EXPECT_LT(v.value, integrate_abs_pow_centered(f, 1.5, 2.0, n).value);
  }
}

TEST(Ball, InfiniteWhenSingularOriginInside) {
  const auto f = RadialFunction::power(1.0, -2.0);
  EXPECT_TRUE(integrate_abs_pow_ball(f, 1.0, {0.5, 1.0}, 2, kSettings).infinite);
  EXPECT_FALSE(integrate_abs_pow_ball(f, 1.0, {2.0, 1.0}, 2, kSettings).infinite);
}

TEST(Ball, CenteredAgreementOnRandomFunctions) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 5;
    const double p = 1.0 + (trial % 3) * 0.5;
    const auto f = test_support::random_function(rng, n, p, 1.0, trial % 2 == 0, trial % 3 == 0);
    const double r = 0.1 + 0.3 * (trial % 17);
    const auto centered = integrate_abs_pow_centered(f, p, r, n);
    const auto ball = integrate_abs_pow_ball(f, p, {0.0, r}, n, kSettings);
    ASSERT_EQ(centered.infinite, ball.infinite);
    if (centered.value == 0.0) {
      EXPECT_EQ(ball.value, 0.0);
    } else {
      EXPECT_LT(rel_diff(ball.value, centered.value), kSettings.rel_tol) << serialize(f, "; ");
    }
  }
}

TEST(Ball, AdditivityAcrossBreakpoints) {
  const auto f = RadialFunction::canonicalize({{0, 0.5, 2.0, -0.3}, {0.5, 2.0, -1.0, 0.4}, {2.0, kInf, 3.0, -1.5}});
  for (int n : {1, 2, 3, 4}) {
    const double whole = integrate_abs_pow_centered(f, 1.5, 5.0, n).value;
    double parts = 0.0;
    const double omega = VolumeConstants(n).unit_sphere_area;
    for (const auto& [a, b] : {std::pair{0.0, 0.5}, std::pair{0.5, 2.0}, std::pair{2.0, 5.0}})
      parts += omega * detail::closed_form_radial(f, 1.5, n, a, b);
    EXPECT_LT(rel_diff(parts, whole), 1e-14);
  }
}

TEST(Ball, ScalingCovariance) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 4;
    const double p = 1.0 + 0.25 * (trial % 5);
    const auto f = test_support::random_function(rng, n, p, 0.5, false, false);
    const double c = -3.0 + 0.17 * trial;
    const Ball b{0.3 * (trial % 7), 0.2 + 0.15 * (trial % 11)};
    const double base = integrate_abs_pow_ball(f, p, b, n, kSettings).value;
    const double scaled = integrate_abs_pow_ball(scale(f, c), p, b, n, kSettings).value;
    EXPECT_NEAR(scaled, std::pow(std::abs(c), p) * base, 1e-12 * (1.0 + scaled));
  }
}

TEST(MonteCarlo, ZeroVarianceConstant) {
  IntegrationSettings s;
  s.mc_samples = 100'000;
  const auto mc = mc_integrate(RadialFunction::power(1.0, 0.0), 1.0, {0.0, 1.0}, 2, s);
  EXPECT_NEAR(mc.estimate, std::numbers::pi, 1e-12);
  EXPECT_EQ(mc.std_error, 0.0);
}

TEST(MonteCarlo, ZeroFunctionIsExactlyZero) {
  const auto mc = mc_integrate(RadialFunction{}, 1.0, {1.0, 1.0}, 3, kSettings);
  EXPECT_EQ(mc.estimate, 0.0);
  EXPECT_EQ(mc.std_error, 0.0);
}

TEST(MonteCarlo, OneDimensionalExampleWithinThreeSigma) {
  const auto mc = mc_integrate(RadialFunction::power(1.0, -0.5), 1.0, {2.0, 1.0}, 1, kSettings);
  EXPECT_GT(mc.std_error, 0.0);
  EXPECT_LT(std::abs(mc.estimate - 2.0 * (std::sqrt(3.0) - 1.0)), 3.0 * mc.std_error);
}

TEST(MonteCarlo, AgreesWithQuadratureOnRandomBalls) {
  std::mt19937_64 rng(29);
  IntegrationSettings s;
  s.mc_samples = 200'000;
  int agree = 0;
  const int cases = 20;
  for (int trial = 0; trial < cases; ++trial) {
    const int n = 1 + trial % 4;
    const auto f = test_support::random_function(rng, n, 1.0, 0.5, trial % 2 == 0, trial % 2 == 1);
    // Keep the origin outside the ball.
    const double r = 0.2 + 0.1 * (trial % 6);
    const Ball b{r + 0.05 + 0.2 * (trial % 5), r};
    s.rng_seed = 1000 + trial;
    const auto mc = mc_integrate(f, 1.0, b, n, s);
    const double exact = integrate_abs_pow_ball(f, 1.0, b, n, kSettings).value;
    if (std::abs(mc.estimate - exact) <= 3.0 * mc.std_error + 1e-12 * std::abs(exact)) ++agree;
  }
  EXPECT_GE(agree, 19);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  const auto f = RadialFunction::canonicalize({{0.2, 1.0, 2.0, -0.5}, {1.0, kInf, 1.0, -2.0}});
  IntegrationSettings s;
  s.mc_samples = 300'000;
  set_thread_count(1);
  const auto one = mc_integrate(f, 1.0, {1.3, 0.9}, 3, s);
  set_thread_count(4);
  const auto four = mc_integrate(f, 1.0, {1.3, 0.9}, 3, s);
  set_thread_count(1);
  EXPECT_EQ(one.estimate, four.estimate);
  EXPECT_EQ(one.std_error, four.std_error);
}

TEST(Settings, Validation) {
  IntegrationSettings s;
  s.rel_tol = 0.0;
  EXPECT_THROW(s.validate(), Error);
  EXPECT_THROW(integrate_abs_pow_ball(RadialFunction::power(1, 0), 1.0, {0.0, 0.0}, 2, kSettings), Error);
}
