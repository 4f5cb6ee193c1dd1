#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "morrey/constants_engine.hpp"
#include "morrey/norm_engine.hpp"
#include "test_support.hpp"

using namespace morrey;

namespace {

const double kTwoRootTwo = 2.0 * std::numbers::sqrt2;

SpaceParams morrey_params(int n = 1, double p = 1.0, double q = 2.0) {
  return SpaceParams::make(n, p, q, Mode::Morrey);
}

SpaceParams small_params(int n = 1, double p = 1.0, double q = 2.0) {
  return SpaceParams::make(n, p, q, Mode::SmallMorrey);
}

// Coarser search for the randomized property tests.
SearchSettings quick_search() {
  SearchSettings s;
  s.r_grid = 24;
  s.d_grid = 13;
  s.golden_steps = 30;
  s.d_max = 12.0;
  return s;
}

}  // namespace

TEST(Profile, PurePowerIsConstant) {
  const auto f = RadialFunction::power(1.0, -0.5);
  for (double r : {1e-3, 0.5, 1.0, 17.0, 1e5}) EXPECT_NEAR(centered_norm_profile(f, morrey_params(), r), kTwoRootTwo, 1e-12);
}

TEST(Profile, TailOfPowerApproachesFromBelow) {
  const auto h = RadialFunction::canonicalize({{1.0, kInf, 1.0, -0.5}});
  EXPECT_EQ(centered_norm_profile(h, morrey_params(), 0.5), 0.0);
  EXPECT_EQ(centered_norm_profile(h, morrey_params(), 1.0), 0.0);
  for (double r : {1.5, 4.0, 100.0, 1e6})
    EXPECT_NEAR(centered_norm_profile(h, morrey_params(), r), kTwoRootTwo * (1.0 - 1.0 / std::sqrt(r)), 1e-12);
}

TEST(Profile, ZeroFunctionAndDomain) {
  EXPECT_EQ(centered_norm_profile(RadialFunction{}, morrey_params(), 2.0), 0.0);
  EXPECT_THROW(centered_norm_profile(RadialFunction{}, small_params(), 1.0), Error);
}

TEST(ClosedForm, Values) {
  EXPECT_NEAR(closed_form_power_norm(morrey_params(1, 1, 2)), 2.8284271247461901, 1e-15);
  EXPECT_NEAR(closed_form_power_norm(morrey_params(2, 1, 2)), 3.5449077018110321, 1e-15);
  EXPECT_NEAR(closed_form_power_norm(morrey_params(1, 2, 3)), 2.1822472719434428, 1e-15);
  EXPECT_NEAR(closed_form_power_norm(morrey_params(3, 2, 4)), 2.023192237970963, 1e-15);
  EXPECT_THROW(closed_form_power_norm(morrey_params(1, 2, 2)), Error);
}

TEST(MorreyNorm, PowerMatchesClosedFormAndSitsAtOrigin) {
  for (const auto& [n, p, q] : {std::tuple{1, 1.0, 2.0}, std::tuple{2, 1.0, 2.0}, std::tuple{1, 2.0, 3.0},
                                std::tuple{3, 2.0, 4.0}}) {
    const auto params = morrey_params(n, p, q);
    const auto result = morrey_norm(RadialFunction::power(1.0, params.critical_exponent()), params);
    const double expected = closed_form_power_norm(params);
    EXPECT_FALSE(result.infinite);
    EXPECT_NEAR(result.value, expected, 1e-3 * expected);
    EXPECT_TRUE(result.tolerance_met);
    // Grid spacing in d is d_max / (d_grid - 1).
    EXPECT_LE(result.argmax.d, 10.0 / 32.0) << "n=" << n;
  }
}

TEST(MorreyNorm, WitnessNorms) {
  const auto params = morrey_params();
  const auto w = witness_family_morrey(params);
  EXPECT_NEAR(morrey_norm(w.f, params).value, kTwoRootTwo, 1e-3 * kTwoRootTwo);
  EXPECT_NEAR(morrey_norm(w.g, params).value, kTwoRootTwo, 1e-3 * kTwoRootTwo);
  EXPECT_NEAR(morrey_norm(w.k, params).value, kTwoRootTwo, 1e-3 * kTwoRootTwo);
  const auto h = morrey_norm(w.h, params);
  // tests/oracles: 2 sqrt2 (1 - 1e-3) at r_max = 1e6.
  EXPECT_NEAR(h.value, 2.8255986976214439, 1e-8);
  EXPECT_TRUE(h.truncated);
  EXPECT_FALSE(morrey_norm(w.f, params).truncated);
}

TEST(MorreyNorm, InfiniteCases) {
  const auto params = morrey_params();
  const auto singular = morrey_norm(RadialFunction::power(1.0, -1.0), params);
  EXPECT_TRUE(singular.infinite);
  EXPECT_TRUE(std::isinf(singular.value));
  EXPECT_TRUE(morrey_norm(RadialFunction::power(1.0, -0.25), params).infinite);  // tail too heavy
  EXPECT_TRUE(morrey_norm(RadialFunction::power(1.0, -0.75), params).infinite);  // too singular at 0
  EXPECT_FALSE(in_space(RadialFunction::power(1.0, -0.5), morrey_params(1, 2, 2)));
}

TEST(MorreyNorm, ZeroFunction) {
  const auto result = morrey_norm(RadialFunction{}, morrey_params());
  EXPECT_EQ(result.value, 0.0);
  EXPECT_FALSE(result.infinite);
}

TEST(MorreyNorm, RejectsWrongMode) {
  EXPECT_THROW(morrey_norm(RadialFunction{}, small_params()), Error);
  EXPECT_THROW(small_morrey_norm(RadialFunction{}, morrey_params()), Error);
}

TEST(SmallMorreyNorm, WitnessNorms) {
  const auto params = small_params();
  const auto w = witness_family_small_morrey(params, 0.25);
  EXPECT_NEAR(small_morrey_norm(w.f, params).value, kTwoRootTwo, 1e-3 * kTwoRootTwo);
  const auto h = small_morrey_norm(w.h, params);
  EXPECT_NEAR(h.value, 1.4142128552657835, 1e-8);
  EXPECT_NEAR(h.value, std::numbers::sqrt2, 1e-5);
  EXPECT_TRUE(h.truncated);
  EXPECT_LT(h.argmax.r, 1.0);
  EXPECT_EQ(small_morrey_norm(RadialFunction{}, params).value, 0.0);
}

TEST(SmallMorreyNorm, HeavyTailIsStillFinite) {
  const auto result = small_morrey_norm(RadialFunction::power(1.0, -0.25), small_params());
  EXPECT_FALSE(result.infinite);
  EXPECT_GT(result.value, 0.0);
}

TEST(Search, ValidatesSettings) {
  SearchSettings s;
  s.r_grid = 1;
  EXPECT_THROW(s.validate(Mode::Morrey), Error);
  SearchSettings t;
  t.r_max = 1.5;
  EXPECT_THROW(t.validate(Mode::SmallMorrey), Error);
}

TEST(Axioms, HomogeneityOnRandomFunctions) {
  std::mt19937_64 rng(41);
  const SearchSettings search = quick_search();
  const IntegrationSettings integ{};
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    const auto params = SpaceParams::make(n, 1.0 + 0.5 * (trial % 2), 3.0, trial % 4 == 3 ? Mode::SmallMorrey : Mode::Morrey);
    const auto f = test_support::random_function(rng, n, params.p, 1.0, false, false);
    const double c = trial % 2 ? -2.5 : 0.3;
    const double base = norm(f, params, search, integ).value;
    const double scaled = norm(scale(f, c), params, search, integ).value;
    EXPECT_NEAR(scaled, std::abs(c) * base, 2.0 * integ.rel_tol * std::abs(c) * base) << serialize(f, "; ");
  }
}

TEST(Axioms, TriangleAndSmallBelowMorrey) {
  const SearchSettings search = quick_search();
  const IntegrationSettings integ{};
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    const auto params = morrey_params(n, 1.0, 2.0);
    const auto pair = random_pair(params, 77, trial);
    const double nx = norm(pair.x, params, search, integ).value;
    const double ny = norm(pair.y, params, search, integ).value;
    const double nsum = norm(add(pair.x, pair.y), params, search, integ).value;
    EXPECT_LE(nsum, (nx + ny) * (1.0 + 2.0 * integ.rel_tol)) << pair.label;
    const auto small = SpaceParams::make(n, 1.0, 2.0, Mode::SmallMorrey);
    EXPECT_LE(norm(pair.x, small, search, integ).value, nx * (1.0 + 2.0 * integ.rel_tol)) << pair.label;
  }
}

TEST(Axioms, NormDominatesCenteredProfile) {
  std::mt19937_64 rng(43);
  const auto params = morrey_params(2, 1.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = test_support::random_function(rng, 2, 1.0, 0.5, false, false);
    const auto result = morrey_norm(f, params, quick_search());
    for (double r = 1e-3; r < 1e6; r *= 3.7)
      EXPECT_GE(result.value, centered_norm_profile(f, params, r) * (1.0 - 1e-9)) << serialize(f, "; ");
  }
}

TEST(Evaluator, CachesAndMatchesDirectCall) {
  const auto params = morrey_params();
  NormEvaluator evaluator(params);
  const auto f = RadialFunction::power(1.0, -0.5);
  const double first = evaluator.value(f);
  EXPECT_EQ(first, evaluator.value(f));
  EXPECT_EQ(first, morrey_norm(f, params).value);
}
