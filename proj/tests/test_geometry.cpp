#include <gtest/gtest.h>

#include <random>

#include "epilab/geometry.hpp"
#include "oracles.hpp"

using namespace epilab;
using namespace epilab::geometry;

namespace {

// Piecewise arcs, written out independently of the library.
double g1_ref(double x) {
  if (x <= -4.0) return 0.0;
  if (x <= 0.0) return std::sqrt(4.0 - (x + 2.0) * (x + 2.0));
  if (x <= 2.0) return std::sqrt(4.0 - (x - 2.0) * (x - 2.0));
  return 2.0;
}

}  // namespace

TEST(EvalG, LipschitzG1Levels) {
  auto g = make_g1();
  EXPECT_EQ(eval_g(g, -5.0), 0.0);
  EXPECT_EQ(eval_g(g, 3.0), 2.0);
  EXPECT_EQ(eval_g(g, -2.0), 2.0);
  EXPECT_EQ(eval_g(g, 0.0), 0.0);
  EXPECT_EQ(eval_g(g, 2.0), 2.0);
}

TEST(EvalG, LipschitzG2AddsRamp) {
  auto g1 = make_g1();
  auto g2 = make_g2();
  for (double x : {-7.0, -3.0, 1.0, 5.0, 6.0})
    EXPECT_DOUBLE_EQ(eval_g(g2, x), eval_g(g1, x));
  EXPECT_DOUBLE_EQ(eval_g(g2, 8.5), 2.0 + 2.5);
}

TEST(EvalG, WeierstrassAtOriginIsGeometricSeries) {
  auto w = make_weierstrass_raw(2, 0.5, 1e-12);
  EXPECT_NEAR(eval_g(w, 0.0), oracle::kWeierstrassAtZero, 1e-12);
}

TEST(EvalG, WeierstrassTruncationMatchesTailRule) {
  const double q = std::pow(2.0, -0.5);
  const int n = weierstrass_terms(2, 0.5, 1e-12);
  // Terms 1..n summed; the cut index n + 1 is the first with tail <= tol.
  EXPECT_GT(std::pow(q, n) / (1 - q), 1e-12);
  EXPECT_LE(std::pow(q, n + 1) / (1 - q), 1e-12);
}

TEST(EvalG, WeierstrassPhaseIsExactForLargeFrequencies) {
  // cos(2^n pi x) for dyadic x is exactly +-1 or 0 once 2^n x is an integer.
  auto w = make_weierstrass_raw(2, 0.5, 1e-12);
  const double x = 0.375;  // 3/8
  double ref = 0.0;
  for (int n = 1; n <= std::get<Weierstrass>(w.kind).terms; ++n) {
    const double phase = std::fmod(std::ldexp(x, n), 2.0);
    ref += std::pow(2.0, -0.5 * n) * std::cos(kPi * phase);
  }
  EXPECT_NEAR(eval_g(w, x), ref, 1e-12);
}

TEST(EvalG, SampledInterpolatesLinearlyAndClamps) {
  auto g = make_sampled(2, SampledG{{{0.0, 1.0, 3.0}}, {0.0, 2.0, 1.0}});
  EXPECT_DOUBLE_EQ(eval_g(g, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(eval_g(g, 2.0), 1.5);
  EXPECT_DOUBLE_EQ(eval_g(g, -4.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_g(g, 9.0), 1.0);
}

TEST(EvalG, SampledBilinearIn3D) {
  auto g = make_sampled(3, SampledG{{{0.0, 1.0}, {0.0, 1.0}}, {0.0, 1.0, 2.0, 4.0}});
  const double p[2] = {0.5, 0.5};
  EXPECT_DOUBLE_EQ(eval_g(g, std::span<const double>(p, 2)), 1.75);
}

TEST(EvalG, SampledRejectsBadLattices) {
  EXPECT_THROW(make_sampled(2, SampledG{{{0.0, 0.0}}, {1.0, 1.0}}), LabError);
  EXPECT_THROW(make_sampled(2, SampledG{{{0.0, 1.0}}, {1.0}}), LabError);
}

TEST(Normalization, CatalogMinimumOnProbeLattice) {
  // 10^4 probe points; each member is normalized on this lattice, so the
  // minimum is 0 exactly and certainly below the line resolution.
  const auto lattice = probe_line_grid(-10.0, 10.0, 10000);
  std::vector<EpigraphSpec> members = {make_half_space(), make_g1(), make_g2(),
                                       make_coercive_quadratic(), make_exp_x1(),
                                       make_weierstrass_raw(2, 0.5, 1e-12),
                                       make_sampled(2, SampledG{{{-1.0, 0.0, 1.0}}, {3.0, 1.0, 2.0}})};
  for (auto spec : members) {
    spec = normalized(spec, lattice);
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& p : lattice) lo = std::min(lo, eval_g(spec, p));
    EXPECT_GE(lo, 0.0) << spec.tag();
    EXPECT_LE(lo, SectionOptions{}.line_resolution) << spec.tag();
  }
}

TEST(Normalization, WeierstrassFactoryNormalizesOverOnePeriod) {
  auto w = make_weierstrass(2, 0.5, 1e-12);
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) lo = std::min(lo, eval_g(w, 2.0 * i / 10000.0));
  EXPECT_EQ(lo, 0.0);
}

TEST(Continuity, DiscreteModulusIsFinite) {
  const auto lattice = probe_line_grid(-8.0, 8.0, 4001);
  for (auto spec : {make_g1(), make_g2(), make_weierstrass_raw(3, 0.3, 1e-10)}) {
    double modulus = 0.0;
    for (std::size_t i = 1; i < lattice.size(); ++i)
      modulus = std::max(modulus, std::abs(eval_g(spec, lattice[i]) - eval_g(spec, lattice[i - 1])));
    EXPECT_TRUE(std::isfinite(modulus));
    EXPECT_LT(modulus, 5.0) << spec.tag();
  }
}

TEST(Reflect, Examples) {
  EXPECT_EQ(reflect({0.0, 0.5, 0.0}, 2, 1.0)[1], 1.5);
  EXPECT_EQ(reflect({0.0, 1.0, 0.0}, 2, 1.0)[1], 1.0);
  EXPECT_EQ(reflect({0.0, 1.0, 0.0}, 2, 1.0)[0], 0.0);
}

TEST(Reflect, InvolutionIsExactForDyadicLambda) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-4.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    Coord p{d(rng), d(rng), std::ldexp(std::round(std::ldexp(d(rng), 20)), -20)};
    const double lambda = std::ldexp(std::round(std::ldexp(d(rng), 8)), -8);
    EXPECT_EQ(reflect(reflect(p, 3, lambda), 3, lambda), p);
  }
}

TEST(Cap, Membership) {
  auto half = make_half_space();
  const double a[2] = {0.0, 0.5}, b[2] = {0.0, 1.5}, c[2] = {3.0, 2.5}, d[2] = {3.0, 1.5};
  EXPECT_TRUE(cap_membership(half, a, 1.0));
  EXPECT_FALSE(cap_membership(half, b, 1.0));
  EXPECT_TRUE(cap_membership(make_g1(), c, 3.0));
  EXPECT_FALSE(cap_membership(make_g1(), d, 3.0));
}

TEST(OpenSets, Omega1Membership) {
  auto s = OpenSet::omega1();
  EXPECT_TRUE(s.contains(Coord{0.0, 0.9, 0.0}));
  EXPECT_FALSE(s.contains(Coord{0.0, 1.5, 0.0}));
  EXPECT_TRUE(s.contains(Coord{5.0, 5.0, 0.0}));
  EXPECT_TRUE(s.contains(Coord{-5.0, -5.0, 0.0}));
  EXPECT_FALSE(s.contains(Coord{5.0, 4.0, 0.0}));
}

TEST(OpenSets, RevolutionAndBall) {
  auto r = OpenSet::revolution_cosine(1.0, 0.2);
  EXPECT_TRUE(r.contains(Coord{0.0, 1.19, 0.0}));
  EXPECT_FALSE(r.contains(Coord{kPi, 0.81, 0.0}));
  auto b = OpenSet::ball({0.0, 0.0, 0.0}, 1.0);
  EXPECT_TRUE(b.contains(Coord{0.5, 0.5, 0.0}));
  EXPECT_FALSE(b.contains(Coord{0.8, 0.8, 0.0}));
}

TEST(Section, StripEqualsWidth) {
  const double nu[2] = {0.0, 1.0};
  auto m = section_measure(OpenSet::strip(0.0, 1.5), nu, probe_line_grid(-5, 5, 11));
  EXPECT_NEAR(m.value, 1.5, SectionOptions{}.line_resolution);
  EXPECT_FALSE(m.unbounded_suspected);
  for (const auto& s : m.per_line) EXPECT_EQ(s.intervals.size(), 1u);
}

TEST(Section, StripErrorDecreasesWithResolution) {
  // With bisection refinement the error is far below first order; check it
  // never grows when the resolution is halved.
  const double nu[2] = {0.0, 1.0};
  double prev = 1.0;
  for (double res : {0.1, 0.05, 0.025}) {
    auto m = section_measure(OpenSet::strip(0.0, std::sqrt(2.0)), nu, probe_line_grid(0, 0, 1), {res, 100.0});
    const double err = std::abs(m.value - std::sqrt(2.0));
    EXPECT_LE(err, res);
    EXPECT_LE(err, prev + 1e-15);
    prev = err;
  }
}

TEST(Section, Omega1MatchesIntervalUnionOracle) {
  const double nu[2] = {0.0, 1.0};
  const auto probe = probe_line_grid(-10.0, 10.0, 201);
  auto m = section_measure(OpenSet::omega1(), nu, probe);
  EXPECT_LE(m.value, 4.0);
  EXPECT_FALSE(m.unbounded_suspected);
  for (const auto& line : m.per_line)
    EXPECT_NEAR(line.measure, oracle::omega1_line(line.x_prime[0]), 1e-6) << line.x_prime[0];
  EXPECT_NEAR(oracle::omega1_line(0.0), 2.0, 1e-15);
  EXPECT_NEAR(oracle::omega1_line(1.0), 2.0 + 2.0 * oracle::kOmega1Halfwidth1, 1e-12);
}

TEST(Section, Omega3IsFlaggedUnbounded) {
  const double nu[2] = {0.0, 1.0};
  auto m = section_measure(OpenSet::omega3(), nu, probe_line_grid(-20.0, 20.0, 41));
  EXPECT_TRUE(m.unbounded_suspected);
}

TEST(Section, MonotoneUnderInclusion) {
  const double nu[2] = {0.0, 1.0};
  const auto probe = probe_line_grid(-3.0, 3.0, 61);
  auto small = section_measure(OpenSet::strip(0.2, 0.9), nu, probe);
  auto large = section_measure(OpenSet::strip(0.0, 1.0), nu, probe);
  auto disk = section_measure(OpenSet::ball({0.0, 0.5, 0.0}, 0.5), nu, probe);
  EXPECT_LE(small.value, large.value + 0.01);
  EXPECT_LE(disk.value, large.value + 0.01);
}

TEST(Section, ObliqueDirectionOnStrip) {
  const double nu[2] = {std::sqrt(0.5), std::sqrt(0.5)};
  auto m = section_measure(OpenSet::strip(0.0, 1.0), nu, probe_line_grid(-2, 2, 5));
  EXPECT_NEAR(m.value, std::sqrt(2.0), 0.01);
}

TEST(Section, RejectsBadInput) {
  const double nu[2] = {0.0, 1.0}, bad[2] = {1.0, 1.0};
  EXPECT_THROW(section_measure(OpenSet::strip(0, 1), nu, {}), LabError);
  EXPECT_THROW(section_measure(OpenSet::strip(0, 1), bad, probe_line_grid(0, 1, 2)), LabError);
  EXPECT_THROW(section_measure(OpenSet::strip(0, 1), nu, probe_line_grid(0, 1, 2), {0.0, 100.0}), LabError);
}

TEST(Section, WeightedIntegralOnStrip) {
  const double nu[2] = {0.0, 1.0};
  auto m = section_measure(OpenSet::strip(0.0, 1.0), nu, probe_line_grid(0, 0, 1));
  // int_0^1 y^2 e^{2y} dy = (e^2 - 1) / 4
  EXPECT_NEAR(weighted_section(m, 2, 1.0, 1.0), (std::exp(2.0) - 1.0) / 4.0, 1e-8);
  EXPECT_NEAR(weighted_section(m, 2, 0.0, 0.0), 1.0, 1e-9);
}

TEST(Metadata, ExteriorSphereRadius) {
  EXPECT_EQ(exterior_sphere_radius(make_g1()), 0.5);
  EXPECT_TRUE(std::isnan(exterior_sphere_radius(make_half_space())));
}

TEST(G1, AgreesWithReferenceArcs) {
  for (double x = -6.0; x <= 4.0; x += 0.125) {
    EXPECT_NEAR(eval_g(make_g1(), x), g1_ref(x), 1e-15) << x;
  }
}
