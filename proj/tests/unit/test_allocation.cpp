#include <stmatch/allocation.hpp>
#include <stmatch/analytic.hpp>
#include <stmatch/scenarios.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace stmatch;

namespace {

Scenario grid_scenario(const std::vector<Vec2>& positions, const std::function<double(const Vec2&)>& density,
                       int n = 12, double reward = 10.0) {
  Scenario s;
  const SpatialGrid g{0, 1, 0, 1, n, n};
  Matrix dens(g.cell_count(), 1);
  for (int c = 0; c < g.cell_count(); ++c) dens(c, 0) = density(g.cell_center(c));
  s.demand = DemandField(g, dens);
  for (const Vec2& p : positions) {
    Station st;
    st.position = p;
    st.capacity = CapacityProfile::constant(0, 10, 1.0);
    s.stations.push_back(st);
  }
  TwoPieceLinear cost{1.0, 0.0, 1.0, 0.0, true, false};
  s.temporal_costs.push_back(cost);
  s.reward = reward;
  s.mode = TemporalMode::HomogeneousPreference;
  s.validate();
  return s;
}

}  // namespace

TEST(ProportionalRule, SymmetricStationsSplitEvenly) {
  const Scenario s = grid_scenario({Vec2(0.25, 0.5), Vec2(0.75, 0.5)}, [](const Vec2&) { return 1.0; });
  const Vector c = optimal_capacity_single_type(s, 4.0);
  EXPECT_NEAR(c[0], 2.0, 1e-12);
  EXPECT_NEAR(c[1], 2.0, 1e-12);
}

TEST(ProportionalRule, AllDemandInOneCell) {
  const Scenario s =
      grid_scenario({Vec2(0.1, 0.1), Vec2(0.9, 0.9)}, [](const Vec2& x) { return x.x() < 0.3 && x.y() < 0.3 ? 1.0 : 0.0; });
  const Vector c = optimal_capacity_single_type(s, 3.0);
  EXPECT_NEAR(c[0], 3.0, 1e-12);
  EXPECT_NEAR(c[1], 0.0, 1e-12);
}

TEST(ProportionalRule, SkewedLineDensity) {
  Scenario s;
  const SpatialGrid g{0, 1, -0.5, 0.5, 1000, 1};
  Matrix dens(1000, 1);
  for (int c = 0; c < 1000; ++c) dens(c, 0) = 2.0 * g.cell_center(c).x();
  s.demand = DemandField(g, dens);
  for (double x : {0.0, 1.0}) {
    Station st;
    st.position = Vec2(x, 0);
    st.capacity = CapacityProfile::constant(0, 1, 1);
    s.stations.push_back(st);
  }
  s.temporal_costs.push_back(TwoPieceLinear{});
  const Vector c = optimal_capacity_single_type(s, 1.0);
  EXPECT_NEAR(c[0], 0.25, 1e-9);
  EXPECT_NEAR(c[1], 0.75, 1e-9);
}

TEST(ProportionalRule, RequiresSingleType) {
  EXPECT_THROW(optimal_capacity_single_type(three_type_scenario(), 1.0), AssumptionError);
}

TEST(CapacityAllocation, SymmetricSplit) {
  const Scenario s = grid_scenario({Vec2(0.25, 0.5), Vec2(0.75, 0.5)}, [](const Vec2&) { return 1.0; });
  const AllocationResult r = solve_capacity_allocation(s, 2.0, Vector::Ones(2));
  EXPECT_TRUE(r.report.converged) << r.report.message;
  EXPECT_NEAR(r.scales[0], 1.0, 1e-3);
  EXPECT_NEAR(r.scales[1], 1.0, 1e-3);
  EXPECT_NEAR(r.scales.sum(), 2.0, 1e-9);
  EXPECT_EQ(r.binding.size(), 2u);
}

TEST(CapacityAllocation, MatchesProportionalRule) {
  const Scenario s = grid_scenario({Vec2(0.2, 0.2), Vec2(0.8, 0.3), Vec2(0.4, 0.85)},
                                   [](const Vec2& x) { return 0.5 + x.x() + 0.5 * x.y() * x.y(); });
  const double budget = 2.0;
  const AllocationResult r = solve_capacity_allocation(s, budget, Vector::Ones(3));
  ASSERT_TRUE(r.report.converged) << r.report.message;
  const Vector c = optimal_capacity_single_type(s, budget);
  EXPECT_LT((r.scales - c).cwiseAbs().maxCoeff() / budget, 1e-2);
  EXPECT_NEAR(r.scales.sum(), budget, 1e-9 * budget);
}

TEST(CapacityAllocation, WeightedBudgetIsExact) {
  const Scenario s = grid_scenario({Vec2(0.2, 0.2), Vec2(0.8, 0.7)}, [](const Vec2& x) { return 1.0 + x.x(); });
  const Vector xi = Eigen::Vector2d(1.0, 2.5);
  const AllocationResult r = solve_capacity_allocation(s, 3.0, xi);
  EXPECT_NEAR(xi.dot(r.scales), 3.0, 1e-9 * 3.0);
}

TEST(CapacityAllocation, ZeroDemandIsDegenerate) {
  const Scenario s = grid_scenario({Vec2(0.2, 0.2), Vec2(0.8, 0.7)}, [](const Vec2&) { return 0.0; });
  const AllocationResult r = solve_capacity_allocation(s, 1.0, Vector::Ones(2));
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.scales.norm(), 0.0);
}

TEST(CapacityAllocation, RejectsBadBudget) {
  const Scenario s = grid_scenario({Vec2(0.2, 0.2)}, [](const Vec2&) { return 1.0; });
  EXPECT_THROW(solve_capacity_allocation(s, 0.0, Vector::Ones(1)), ValidationError);
  EXPECT_THROW(solve_capacity_allocation(s, 1.0, Vector::Zero(1)), ValidationError);
  EXPECT_THROW(solve_capacity_allocation(s, 1.0, Vector::Ones(2)), ValidationError);
}

TEST(Dispersion, AmpleCapacityAlwaysDisperses) {
  for (double c0 : {0.0, 1.0, 100.0, 1e6}) EXPECT_EQ(dispersion_vs_concentration(2, 2, 1, c0).verdict, Configuration::Dispersion);
}

TEST(Dispersion, ThresholdExample) {
  const DispersionVerdict v = dispersion_vs_concentration(1, 1, 2, 10);
  EXPECT_NEAR(v.threshold, 2.0, 1e-15);
  EXPECT_EQ(v.verdict, Configuration::Concentration);
  EXPECT_LT(v.concentration_cost, v.dispersion_cost);
}

TEST(Dispersion, WelfaresTieAtThreshold) {
  const DispersionVerdict probe = dispersion_vs_concentration(1.5, 0.7, 3, 0);
  const DispersionVerdict at = dispersion_vs_concentration(1.5, 0.7, 3, probe.threshold);
  EXPECT_NEAR(at.dispersion_welfare, at.concentration_welfare, 1e-12);
}

TEST(Dispersion, CostsAgreeWithHotellingWelfare) {
  const DispersionVerdict v = dispersion_vs_concentration(1.5, 0.7, 3, 1.0, 20.0);
  const HomogeneousSolution h = hotelling_homogeneous({1.5, 0.7, 3, 20.0});
  EXPECT_EQ(h.regime, HotellingRegime::Complete);
  EXPECT_NEAR(v.dispersion_welfare, h.welfare, 1e-12);
}

TEST(DispersionBounds, Examples) {
  EXPECT_TRUE(dispersion_bounds_general(1.0, 1.0, 2, 1, 1).dispersion_sufficient);
  EXPECT_TRUE(dispersion_bounds_general(1.0, 0.0, 2, 1, 1).concentration_sufficient);
}

TEST(DispersionBounds, NeverBothOnSolvedInstances) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    const double c1 = 0.5 + 2 * u(rng), c2 = 0.5 + 2 * u(rng);
    Scenario s = hotelling_scenario({c1, c2, 0.5 + 5 * u(rng), 0.3 + 2 * u(rng)}, 1, 100);
    const SolveResult r = solve_stbd(s);
    const DispersionBounds b = dispersion_bounds_general(r.eta(0, 0), r.eta(1, 0), c1, c2, s.total_demand());
    if (r.eta(1, 0) > 0.0) EXPECT_FALSE(b.dispersion_sufficient && b.concentration_sufficient);
  }
}

TEST(SpatialDifference, BoundedByStationDistance) {
  const Scenario s = grid_scenario({Vec2(0.2, 0.2), Vec2(0.8, 0.7)}, [](const Vec2&) { return 1.0; });
  const double d = spatial_difference_bound(s);
  EXPECT_LE(d, (Vec2(0.2, 0.2) - Vec2(0.8, 0.7)).norm() + 1e-12);
  EXPECT_GT(d, 0.5);
}
