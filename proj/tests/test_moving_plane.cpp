#include <gtest/gtest.h>

#include <random>

#include "epilab/moving_plane.hpp"
#include "epilab/profiles.hpp"
#include "oracles.hpp"

using namespace epilab;
using namespace epilab::moving_plane;
using discretization::Box;
using geometry::OpenSet;

namespace {

std::shared_ptr<const discretization::DomainGrid> half_plane(double width, double height, double h) {
  Box b{2, {0, 0, 0}, {width, height, 0}};
  return std::make_shared<const discretization::DomainGrid>(
      discretization::build_grid(OpenSet::epigraph(geometry::make_half_space()), b, h));
}

solver::SolutionField profile_field(const profiles::Profile& p, double height, double h) {
  return solver::sample_field(half_plane(1.0, height, h), p.field(2), p.name);
}

double y_of(const solver::SolutionField& u, std::size_t eq) { return u.grid->coord(u.grid->lattice_of(eq))[1]; }

}  // namespace

TEST(Reflect, AffineField) {
  auto g = half_plane(1.0, 4.0, 1.0 / 16);
  auto u = solver::sample_field(g, [](const Coord& x) { return x[1]; }, "y");
  auto r = reflect_field(u, 1.0, [&](std::size_t eq) { return y_of(u, eq) <= 2.0; });
  EXPECT_TRUE(r.exact);
  for (std::size_t eq = 0; eq < g->size(); ++eq) {
    const double y = y_of(u, eq);
    if (y <= 2.0) EXPECT_NEAR(r.field.values[eq], 2.0 - y, 1e-14);
    else EXPECT_TRUE(std::isnan(r.field.values[eq]));
  }
}

TEST(Reflect, SymmetricFieldIsFixed) {
  auto g = half_plane(1.0, 4.0, 1.0 / 16);
  auto u = solver::sample_field(g, [](const Coord& x) { return (x[1] - 1.5) * (x[1] - 1.5); }, "sym");
  auto r = reflect_field(u, 1.5, [&](std::size_t eq) { return y_of(u, eq) <= 3.0; });
  for (std::size_t eq = 0; eq < g->size(); ++eq)
    if (y_of(u, eq) <= 3.0) EXPECT_EQ(r.field.values[eq], u.values[eq]);
}

TEST(Reflect, TanhValue) {
  auto u = profile_field(profiles::tanh_front(), 4.0, 1.0 / 32);
  auto r = reflect_field(u, 1.0, [&](std::size_t eq) { return y_of(u, eq) <= 2.0; });
  auto id = u.grid->locate({0.5, 0.5, 0});
  ASSERT_TRUE(id);
  EXPECT_NEAR(r.field.values[u.grid->equation(*id)], oracle::kTanhReflected, 1e-14);
}

TEST(Reflect, OffLatticeUsesCubicWithinBound) {
  auto u = profile_field(profiles::tanh_front(), 4.0, 1.0 / 32);
  const double lambda = 1.0 + 1.0 / 128;
  auto r = reflect_field(u, lambda, [&](std::size_t eq) { return y_of(u, eq) <= 2.0; });
  EXPECT_FALSE(r.exact);
  EXPECT_GT(r.interpolation_bound, 0.0);
  double err = 0.0;
  for (std::size_t eq = 0; eq < u.grid->size(); ++eq) {
    const double y = y_of(u, eq);
    if (y > 2.0) continue;
    err = std::max(err, std::abs(r.field.values[eq] - std::tanh((2 * lambda - y) / std::sqrt(2.0))));
  }
  EXPECT_LE(err, 2.0 * r.interpolation_bound + 1e-15);
  EXPECT_LT(err, 1e-7);
}

TEST(Reflect, InvolutionAtMappedNodes) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(8, 40);
  auto u = profile_field(profiles::double_bump(), 6.0, 1.0 / 16);
  for (int trial = 0; trial < 10; ++trial) {
    const double lambda = pick(rng) / 16.0;
    auto region = [&](std::size_t eq) {
      const double y = y_of(u, eq);
      return 2 * lambda - y >= 0.0 && 2 * lambda - y <= 6.0;
    };
    auto once = reflect_field(u, lambda, region);
    auto twice = reflect_field(once.field, lambda, region);
    ASSERT_TRUE(twice.exact);
    for (std::size_t eq = 0; eq < u.grid->size(); ++eq)
      if (region(eq)) EXPECT_EQ(twice.field.values[eq], u.values[eq]) << lambda;
  }
}

TEST(Reflect, LeavingWindowIsAnError) {
  auto u = profile_field(profiles::tanh_front(), 2.0, 1.0 / 8);
  try {
    reflect_field(u, 1.5);
    FAIL() << "expected geometry error";
  } catch (const LabError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::geometry);
    EXPECT_NE(std::string(e.what()).find("reflection leaves window"), std::string::npos);
  }
}

TEST(CapSweep, TanhIsStrictlyMonotone) {
  auto u = profile_field(profiles::tanh_front(), 12.0, 1.0 / 32);
  auto rep = cap_sweep(u, geometry::make_half_space(), default_lambda_grid(*u.grid, 5.0, 0.125), 1e-8);
  ASSERT_FALSE(rep.caps.empty());
  EXPECT_NEAR(rep.caps.front().lambda, 2.0 / 32, 1e-15);
  for (const auto& c : rep.caps) {
    EXPECT_TRUE(std::isfinite(c.min_diff));
    EXPECT_GE(c.min_diff, -1e-8) << c.lambda;
  }
  EXPECT_GT(rep.dn_u_min, 0.0);
  ASSERT_TRUE(rep.monotone_up_to);
  EXPECT_DOUBLE_EQ(*rep.monotone_up_to, rep.caps.back().lambda);
  EXPECT_LE(*rep.monotone_up_to, rep.lambda_grid().back());
  EXPECT_TRUE(rep.sign_change_cells.empty());
}

TEST(CapSweep, PlateauIsMonotoneButFlatAboveOne) {
  auto u = profile_field(profiles::plateau(), 6.0, 1.0 / 32);
  auto rep = cap_sweep(u, geometry::make_half_space(), default_lambda_grid(*u.grid, 2.5, 1.0 / 32), 1e-8);
  EXPECT_GE(rep.min_cap_diff(), -1e-12);
  EXPECT_EQ(rep.max_abs_slope_above(1.0 + 1e-9, 2), 0.0);
  ASSERT_TRUE(rep.zero_slope_from);
  EXPECT_LE(*rep.zero_slope_from, 1.0);
  EXPECT_TRUE(rep.sign_change_cells.empty());
  EXPECT_EQ(rep.dn_u_min, 0.0);
}

TEST(CapSweep, DoubleBumpChangesSign) {
  auto u = profile_field(profiles::double_bump(), 6.0, 1.0 / 32);
  auto rep = cap_sweep(u, geometry::make_half_space(), default_lambda_grid(*u.grid, 2.9, 1.0 / 32), 1e-8);
  ASSERT_FALSE(rep.sign_change_cells.empty());
  bool in_band = false;
  for (const auto& c : rep.sign_change_cells) in_band = in_band || (c[1] > 1.9 && c[1] < 3.1);
  EXPECT_TRUE(in_band);
  EXPECT_LT(rep.dn_u_min, 0.0);
  // The reflection across lambda in (2, 3) puts the falling half above the rising one.
  ASSERT_TRUE(rep.monotone_up_to);
  EXPECT_LT(*rep.monotone_up_to, 2.9);
}

TEST(CapSweep, MonotoneFieldsHaveOrderedCaps) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> coef(0.1, 2.0);
  for (int trial = 0; trial < 8; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    auto g = half_plane(1.0, 8.0, 1.0 / 32);
    auto u = solver::sample_field(
        g, [=](const Coord& x) { return a * x[1] + b * std::tanh(c * x[1]) + 0.05 * std::sin(x[0]); }, "monotone");
    // Off-lattice planes exercise the interpolation bound.
    std::vector<double> lambdas;
    for (double l = 0.1; l < 3.9; l += 0.37) lambdas.push_back(l);
    const double tol = 1e-9;
    auto rep = cap_sweep(u, geometry::make_half_space(), lambdas, tol);
    ASSERT_GT(rep.dn_u_min, tol);
    for (const auto& cap : rep.caps) EXPECT_GE(cap.min_diff, -(tol + cap.interpolation_bound)) << cap.lambda;
    EXPECT_EQ(rep.monotone_up_to, lambdas.back());
  }
}

TEST(CapSweep, StableUnderRefinement) {
  std::vector<double> lambdas;
  for (int k = 1; k <= 16; ++k) lambdas.push_back(0.25 * k);
  for (double h : {1.0 / 16, 1.0 / 32}) {
    auto u = profile_field(profiles::tanh_front(), 10.0, h);
    auto rep = cap_sweep(u, geometry::make_half_space(), lambdas, 1e-8);
    for (const auto& c : rep.caps) EXPECT_GE(c.min_diff, 0.0) << h << " " << c.lambda;
  }
}

TEST(CapSweep, Validation) {
  auto u = profile_field(profiles::tanh_front(), 4.0, 1.0 / 8);
  EXPECT_THROW(cap_sweep(u, geometry::make_half_space(), {}, 1e-8), LabError);
  EXPECT_THROW(cap_sweep(u, geometry::make_half_space(), {1.0, 0.5}, 1e-8), LabError);
  EXPECT_THROW(cap_sweep(u, geometry::make_half_space(3), {1.0}, 1e-8), LabError);
  EXPECT_THROW(cap_sweep(u, geometry::make_half_space(), {3.0}, 1e-8), LabError);
}

TEST(Hopf, TanhDefectIsSecondOrder) {
  for (double lambda : {0.5, 1.0, 2.0}) {
    double prev = 0.0;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
      auto u = profile_field(profiles::tanh_front(), 4.0, h);
      auto rep = hopf_slope_check(u, lambda);
      EXPECT_TRUE(rep.slope_positive);
      if (prev > 0) EXPECT_NEAR(prev / rep.max_defect, 4.0, 0.3) << lambda << " " << h;
      prev = rep.max_defect;
      if (lambda == 1.0) EXPECT_NEAR(rep.min_dn_u, oracle::kTanhSlopeAt1, 0.1 * h * h);
    }
  }
}

TEST(Hopf, SymmetricAndAffine) {
  auto g = half_plane(1.0, 4.0, 1.0 / 16);
  auto sym = solver::sample_field(g, [](const Coord& x) { return std::cos(x[1] - 1.0); }, "sym");
  auto rs = hopf_slope_check(sym, 1.0);
  for (const auto& s : rs.samples) {
    EXPECT_NEAR(s.lhs, 0.0, 1e-13);
    EXPECT_NEAR(s.rhs, 0.0, 1e-13);
  }
  EXPECT_FALSE(rs.slope_positive);
  auto lin = solver::sample_field(g, [](const Coord& x) { return x[1]; }, "y");
  auto rl = hopf_slope_check(lin, 1.0);
  for (const auto& s : rl.samples) {
    EXPECT_NEAR(s.lhs, -2.0, 1e-12);
    EXPECT_NEAR(s.rhs, -2.0, 1e-12);
  }
  EXPECT_THROW(hopf_slope_check(lin, 1.0 + 1.0 / 32), LabError);
}
