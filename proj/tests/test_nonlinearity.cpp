#include <gtest/gtest.h>

#include <random>

#include "epilab/nonlinearity.hpp"
#include "oracles.hpp"

using namespace epilab;
using namespace epilab::nonlinearity;

TEST(EvalF, CatalogValues) {
  EXPECT_DOUBLE_EQ(plateau()(0.75), 6.0);
  EXPECT_DOUBLE_EQ(plateau()(-3.0), 12.0);
  EXPECT_DOUBLE_EQ(plateau()(2.0), 0.0);
  EXPECT_DOUBLE_EQ(linear(1.0)(0.3), 0.3);
  EXPECT_EQ(sign_change()(0.0), 0.0);
  EXPECT_EQ(sign_change()(1.0), 0.0);
  EXPECT_EQ(sign_change()(-0.5), 0.0);
  EXPECT_DOUBLE_EQ(allen_cahn()(2.0), -6.0);
  EXPECT_DOUBLE_EQ(power(2.0)(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(power(2.0)(3.0), 9.0);
}

TEST(EvalF, SignChangeMatchesProfileCurvature) {
  // With v in (0, 1) and t = v^4 the value is 48 v^2 sqrt(1 - v) (5 v - 4).
  for (double v = 0.05; v < 1.0; v += 0.05) {
    const double t = v * v * v * v;
    EXPECT_NEAR(sign_change()(t), 48.0 * v * v * std::sqrt(1.0 - v) * (5.0 * v - 4.0), 1e-12) << v;
  }
}

TEST(EvalF, TableInterpolatesAndRejectsOutside) {
  auto f = table({0.0, 1.0, 2.0}, {1.0, 3.0, 0.0});
  EXPECT_DOUBLE_EQ(f(0.5), 2.0);
  EXPECT_DOUBLE_EQ(f(1.5), 1.5);
  try {
    f(2.5);
    FAIL() << "expected domain error";
  } catch (const LabError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
    EXPECT_NE(std::string(e.what()).find("domain exceeded"), std::string::npos);
  }
}

TEST(Flags, MonotoneAndSmooth) {
  EXPECT_TRUE(plateau().monotone_nonincreasing());
  EXPECT_FALSE(allen_cahn().monotone_nonincreasing());
  EXPECT_TRUE(allen_cahn().liminf_ratio_positive());
  EXPECT_FALSE(plateau().smooth());
  EXPECT_FALSE(sign_change().smooth());
  EXPECT_TRUE(allen_cahn().smooth());
  EXPECT_DOUBLE_EQ(plateau().f0(), 12.0);
  EXPECT_DOUBLE_EQ(allen_cahn().f0(), 0.0);
}

TEST(Flags, PlateauIsNonIncreasingOnSamples) {
  auto f = plateau();
  double prev = f(-2.0);
  for (double t = -2.0; t <= 3.0; t += 1e-3) {
    EXPECT_LE(f(t), prev);
    prev = f(t);
  }
}

TEST(Lipschitz, Examples) {
  EXPECT_EQ(lipschitz_on(linear(1.0), 0, 1), ExtReal(1.0));
  EXPECT_EQ(lipschitz_on(allen_cahn(), 0, 1), ExtReal(2.0));
  EXPECT_TRUE(lipschitz_on(plateau(), 0, 1).is_infinite());
  EXPECT_TRUE(lipschitz_on(sign_change(), 0, 0.5).is_infinite());
  EXPECT_TRUE(lipschitz_on(sign_change(), 0.5, 1.0).is_infinite());
  EXPECT_EQ(lipschitz_on(plateau(), 2, 3), ExtReal(0.0));
}

TEST(Lipschitz, FiniteDifferencesNeverExceedAnalyticBound) {
  struct Case {
    Nonlinearity f;
    double m, M;
  };
  std::vector<Case> cases = {{linear(2.5), -1, 1},        {allen_cahn(), -0.7, 1.3},
                             {allen_cahn(), 0.2, 0.4},    {power(3.0), -1, 2},
                             {power(0.5), 0.25, 4},       {plateau(), -1, 0.9},
                             {sign_change(), 0.05, 0.95}, {sign_change(), 0.3, 0.6},
                             {constant(4.0), -5, 5},      {table({0, 1, 2}, {0, 2, 1}), 0, 2}};
  for (const auto& c : cases) {
    const auto bound = lipschitz_on(c.f, c.m, c.M);
    ASSERT_TRUE(bound.is_finite()) << c.f.tag();
    const double fd = oracle::fd_sup_slope([&](double t) { return c.f(t); }, c.m, c.M, 1000000);
    EXPECT_LE(fd, bound.value() + 1e-6) << c.f.tag() << " on [" << c.m << "," << c.M << "]";
    EXPECT_GE(fd, 0.9 * bound.value()) << c.f.tag();
  }
}

TEST(Lipschitz, FiniteDifferencesDivergeWhereFlaggedInfinite) {
  auto slope = [](const Nonlinearity& f, double m, double M, int n) {
    return oracle::fd_sup_slope([&](double t) { return f(t); }, m, M, n);
  };
  for (auto [f, m, M] : {std::tuple{plateau(), 0.0, 1.0}, std::tuple{sign_change(), 0.0, 0.5},
                         std::tuple{sign_change(), 0.5, 1.0}}) {
    const double coarse = slope(f, m, M, 1000);
    const double fine = slope(f, m, M, 100000);
    EXPECT_GT(fine, 5.0 * coarse) << f.tag();
  }
}

TEST(Derivative, MatchesCentredDifferences) {
  for (const auto& f : {allen_cahn(), power(2.5), linear(-3.0), sign_change(), plateau()}) {
    for (double t : {-0.5, 0.2, 0.45, 0.7, 1.5}) {
      const auto d = f.derivative(t);
      ASSERT_TRUE(d.has_value()) << f.tag() << " t=" << t;
      const double h = 1e-6;
      EXPECT_NEAR(*d, (f(t + h) - f(t - h)) / (2 * h), 1e-5 * std::max(1.0, std::abs(*d))) << f.tag() << t;
    }
  }
  EXPECT_FALSE(plateau().derivative(1.0).has_value());
  EXPECT_FALSE(sign_change().derivative(0.0).has_value());
}

TEST(Thresholds, EpsilonBounded) {
  EXPECT_NEAR(epsilon_bounded(1.0).value(), oracle::kPiOverSqrt2, 1e-9 * oracle::kPiOverSqrt2);
  EXPECT_NEAR(epsilon_bounded(kPi * kPi / 2.0).value(), 1.0, 1e-12);
  EXPECT_TRUE(epsilon_bounded(0.0).is_infinite());
}

TEST(Thresholds, EpsilonGrowth) {
  EXPECT_NEAR(epsilon_growth(1.0, 0.0).value(), oracle::kPiOverSqrt2, 1e-12);
  EXPECT_NEAR(epsilon_growth(0.0, 1.0).value(), oracle::kEpsGrowthL0G1, 1e-9 * oracle::kEpsGrowthL0G1);
  EXPECT_TRUE(epsilon_growth(0.0, 0.0).is_infinite());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(1e-3, 50.0);
  for (int i = 0; i < 200; ++i) {
    const double L = d(rng);
    EXPECT_EQ(epsilon_growth(L, 0.0), epsilon_bounded(L));
  }
}

TEST(Thresholds, StrictMonotonicity) {
  double prev = epsilon_growth(0.1, 0.5).value();
  for (double L = 0.2; L < 10; L += 0.1) {
    const double cur = epsilon_growth(L, 0.5).value();
    EXPECT_LT(cur, prev);
    prev = cur;
  }
  prev = epsilon_growth(1.0, 0.0).value();
  for (double g = 0.05; g < 5; g += 0.05) {
    const double cur = epsilon_growth(1.0, g).value();
    EXPECT_LT(cur, prev);
    prev = cur;
  }
  prev = gamma_max(0.1);
  for (double S = 0.2; S < 10; S += 0.1) {
    EXPECT_LT(gamma_max(S), prev);
    prev = gamma_max(S);
  }
}

TEST(Thresholds, GammaMax) {
  EXPECT_NEAR(gamma_max(kPi), oracle::kGammaMaxPi, 1e-9 * oracle::kGammaMaxPi);
  EXPECT_NEAR(gamma_max(1.0), oracle::kEpsGrowthL0G1, 1e-9 * oracle::kEpsGrowthL0G1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.01, 20.0);
  for (int i = 0; i < 200; ++i) {
    const double S = d(rng);
    EXPECT_NEAR(gamma_max(2 * S), gamma_max(S) / 2, 1e-15 * gamma_max(S));
  }
}

TEST(Thresholds, GrowthLowerBound) {
  const double h = growth_step(1.0);
  EXPECT_NEAR(growth_lower_bound(1.0, 1.0, 1.0, 1.0 + h), 1.0, 1e-12);
  EXPECT_NEAR(growth_lower_bound(1.0, 1.0, 1.0, 1.0 + 2 * h), kE, 1e-9 * kE);
  // alpha = 4 halves h, so the same gap doubles the exponent.
  const double gap = 3.0 * h;
  const double e1 = std::log(growth_lower_bound(1.0, 1.0, 1.0, 1.0 + gap)) + 1.0;
  const double e4 = std::log(growth_lower_bound(4.0, 1.0, 1.0, 1.0 + gap)) + 1.0;
  EXPECT_NEAR(e4, 2.0 * e1, 1e-12);
  EXPECT_THROW(growth_lower_bound(1.0, 1.0, 1.0, 1.0 + 0.5 * h), LabError);
  // The general-step form agrees at h = sqrt((e-1)/alpha).
  EXPECT_NEAR(growth_lower_bound_with_step(1.0, 1.0, 2.0, 1.0 + 2.5 * h, h),
              growth_lower_bound(1.0, 1.0, 2.0, 1.0 + 2.5 * h), 1e-12);
}

TEST(Thresholds, CounterexamplePairViolatesSmallness) {
  EXPECT_LT(epsilon_bounded(1.0), ExtReal(kPi));
}

TEST(Thresholds, LocalizationAndCeiling) {
  EXPECT_NEAR(poincare_factor(kPi), 1.0, 1e-15);
  EXPECT_NEAR(localization_constant(1.0, 1.0).value(), 4.0 / (kPi * kPi - 2.0), 1e-15);
  EXPECT_TRUE(localization_constant(kPi, 1.0).is_infinite());
  EXPECT_NEAR(unit_ball_volume(2), kPi, 1e-14);
  EXPECT_NEAR(growth_upper_bound(1.0, 1.0, 2, 3.0), 4.0 * 2.0 * 3.0, 1e-12);
  // Exponential growth beats the polynomial ceiling eventually.
  const double r = growth_contradiction_radius(1.0, 1.0, 1e-3, 1.0, 1.0, 2);
  EXPECT_GT(growth_lower_bound(1.0, 1.0, 1e-3, r), growth_upper_bound(1.0, 1.0, 2, r));
}

TEST(Params, Validation) {
  ThresholdParams p;
  EXPECT_NO_THROW(p.validate());
  p.section = 0.0;
  EXPECT_THROW(p.validate(), LabError);
}
