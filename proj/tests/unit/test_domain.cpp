#include <stmatch/domain.hpp>
#include <stmatch/scenarios.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace stmatch;

namespace {

Scenario unit_square(int types = 1) {
  Scenario s;
  s.demand = DemandField(SpatialGrid{0, 1, 0, 1, 4, 4}, Matrix::Constant(16, types, 1.0));
  Station st;
  st.position = Vec2(0.5, 0.5);
  st.capacity = CapacityProfile::constant(0, 10, 1);
  s.stations.push_back(st);
  for (int j = 0; j < types; ++j) s.temporal_costs.push_back(TwoPieceLinear{});
  s.reward = 1.0;
  return s;
}

}  // namespace

TEST(Grid, CellIndexingRoundTrips) {
  const SpatialGrid g{0, 2, -1, 1, 4, 2};
  EXPECT_EQ(g.cell_count(), 8);
  EXPECT_DOUBLE_EQ(g.cell_area(), 0.5);
  for (int c = 0; c < g.cell_count(); ++c) EXPECT_EQ(g.cell_of(g.cell_center(c)), c);
  EXPECT_TRUE(g.contains(Vec2(2, 1)));
  EXPECT_FALSE(g.contains(Vec2(2.1, 0)));
}

TEST(Grid, RejectsDegenerateBounds) {
  EXPECT_THROW((SpatialGrid{0, 0, 0, 1, 1, 1}.validate()), ValidationError);
  EXPECT_THROW((SpatialGrid{0, 1, 0, 1, 0, 1}.validate()), ValidationError);
}

TEST(Demand, UniformDensityIntegratesToArea) {
  const Scenario s = unit_square();
  EXPECT_NEAR(s.total_demand(), 1.0, 1e-15);
}

TEST(Demand, RejectsNegativeDensity) {
  Matrix d = Matrix::Constant(4, 1, 1.0);
  d(2, 0) = -1.0;
  EXPECT_THROW(DemandField(SpatialGrid{0, 1, 0, 1, 2, 2}, d), ValidationError);
}

TEST(Capacity, IntegralAndInverse) {
  const CapacityProfile c({0, 1, 3}, {2, 0.5});
  EXPECT_DOUBLE_EQ(c.total(), 3.0);
  EXPECT_DOUBLE_EQ(c.integral(0.5, 2), 1.0 + 0.5);
  EXPECT_DOUBLE_EQ(c.time_at_cumulative(2.5), 2.0);
  EXPECT_DOUBLE_EQ(c.time_at_cumulative(10), 3.0);
  EXPECT_FALSE(c.is_constant());
  EXPECT_DOUBLE_EQ(c.scaled(2).total(), 6.0);
}

TEST(Capacity, RejectsNonIncreasingBreakpoints) {
  EXPECT_THROW(CapacityProfile({0, 0}, {1}), ValidationError);
  EXPECT_THROW(CapacityProfile({0, 1}, {0}), ValidationError);
}

TEST(TemporalCost, TwoPieceValues) {
  TwoPieceLinear c{1.0, 2.0, 1.0, 0.0};
  EXPECT_DOUBLE_EQ(temporal_cost(c, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(temporal_cost(c, -1.0), 2.0);
  c.sensitivity = 0.7;
  EXPECT_NEAR(temporal_cost(c, 3.0), 2.1, 1e-15);
  c.early_forbidden = true;
  EXPECT_TRUE(std::isinf(temporal_cost(c, -0.1)));
}

TEST(TemporalCost, PiecewiseLinearInterpolatesAndIsInfiniteOutside) {
  const PiecewiseLinearCost c{{-1, 0, 2}, {2, 0, 1}};
  EXPECT_DOUBLE_EQ(temporal_cost(c, -0.5), 1.0);
  EXPECT_DOUBLE_EQ(temporal_cost(c, 1.0), 0.5);
  EXPECT_TRUE(std::isinf(temporal_cost(c, 3.0)));
  EXPECT_DOUBLE_EQ(preferred_time(c), 0.0);
  EXPECT_NO_THROW(validate_temporal_cost(c));
  EXPECT_THROW(validate_temporal_cost(PiecewiseLinearCost{{0, 1, 2, 3}, {2, 0, 3, 3.5}}), ValidationError);
  EXPECT_THROW(validate_temporal_cost(PiecewiseLinearCost{{0, 1, 2}, {0, 2, 3}}), ValidationError);
}

TEST(TemporalCost, AffinePiecesMatchPointwiseValues) {
  const TwoPieceLinear c{0.5, 2.0, 3.0, 1.0};
  const auto pieces = affine_pieces(c, -2.0, 4.0);
  ASSERT_EQ(pieces.size(), 2u);
  for (const AffinePiece& p : pieces)
    for (double t : {p.t0, 0.5 * (p.t0 + p.t1), p.t1}) EXPECT_NEAR(p.at(t), temporal_cost(c, t), 1e-14);
}

TEST(SpatialCost, Examples) {
  EXPECT_DOUBLE_EQ(spatial_cost({1, 1}, Vec2(1, 2), Vec2(1, 2)), 0.0);
  EXPECT_DOUBLE_EQ(spatial_cost({1, 1}, Vec2(0, 0), Vec2(3, 4)), 5.0);
  EXPECT_NEAR(spatial_cost({2, 0.5}, Vec2(0, 0), Vec2(1, 1)), 1.0, 1e-15);
}

TEST(SpatialCost, GradientMatchesFiniteDifference) {
  const SpatialCostSpec spec{1.5, 2.0};
  const Vec2 x(0.3, -0.2), y(1.0, 0.4);
  const Vec2 g = spatial_cost_gradient(spec, x, y);
  const double h = 1e-6;
  EXPECT_NEAR(g.x(), (spatial_cost(spec, x + Vec2(h, 0), y) - spatial_cost(spec, x - Vec2(h, 0), y)) / (2 * h), 1e-8);
  EXPECT_NEAR(g.y(), (spatial_cost(spec, x + Vec2(0, h), y) - spatial_cost(spec, x - Vec2(0, h), y)) / (2 * h), 1e-8);
}

TEST(SpatialIntegral, ConstantWeights) {
  const Scenario s = unit_square();
  EXPECT_NEAR(spatial_integral(s.demand, 0, [](const Vec2&) { return 1.0; }), 1.0, 1e-15);
  EXPECT_EQ(spatial_integral(s.demand, 0, [](const Vec2&) { return 0.0; }), 0.0);
}

TEST(SpatialIntegral, MeanDistanceToCenterConvergesUnderRefinement) {
  const double exact = (std::sqrt(2.0) + std::log(1.0 + std::sqrt(2.0))) / 6.0;
  double previous = kInf;
  for (int n : {8, 32, 128}) {
    const DemandField f(SpatialGrid{0, 1, 0, 1, n, n}, Matrix::Constant(n * n, 1, 1.0));
    const double v = spatial_integral(f, 0, [](const Vec2& x) { return (x - Vec2(0.5, 0.5)).norm(); });
    const double err = std::abs(v - exact);
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 1e-4);
  EXPECT_NEAR(exact, 0.3826, 1e-4);
}

TEST(Scenario, ValidatesHomogeneousPreferenceOrdering) {
  Scenario s = unit_square(2);
  s.temporal_costs[0] = TwoPieceLinear{1.0, 1.0, 1.0, 0.0};
  s.temporal_costs[1] = TwoPieceLinear{2.0, 1.0, 1.0, 0.0};
  s.mode = TemporalMode::HomogeneousPreference;
  try {
    s.validate();
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("sensitivities not strictly decreasing"), std::string::npos);
  }
  std::swap(s.temporal_costs[0], s.temporal_costs[1]);
  EXPECT_NO_THROW(s.validate());
}

TEST(Scenario, ValidatesHomogeneousSensitivity) {
  Scenario s = unit_square(2);
  s.mode = TemporalMode::HomogeneousSensitivity;
  EXPECT_THROW(s.validate(), ValidationError);
  std::get<TwoPieceLinear>(s.temporal_costs[1]).preferred_time = 2.0;
  EXPECT_NO_THROW(s.validate());
}

TEST(Scenario, RejectsStationOutsideGridAndMismatchedHorizons) {
  Scenario s = unit_square();
  s.stations[0].position = Vec2(2, 2);
  EXPECT_THROW(s.validate(), ValidationError);
  s = unit_square();
  Station other = s.stations[0];
  other.capacity = CapacityProfile::constant(0, 5, 1);
  s.stations.push_back(other);
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Scenario, ModeNamesRoundTrip) {
  for (TemporalMode m : {TemporalMode::General, TemporalMode::HomogeneousPreference,
                         TemporalMode::HomogeneousSensitivity})
    EXPECT_EQ(temporal_mode_from_string(to_string(m)), m);
  EXPECT_THROW(temporal_mode_from_string("bogus"), ParseError);
}

TEST(Scenario, HotellingEmbeddingMatchesParameters) {
  const Scenario s = hotelling_scenario({3, 1, 10, 2}, 1, 100);
  EXPECT_EQ(s.station_count(), 2);
  EXPECT_DOUBLE_EQ(s.stations[0].capacity.rates()[0], 3.0);
  EXPECT_DOUBLE_EQ(s.stations[1].capacity.rates()[0], 1.0);
  EXPECT_NEAR(s.total_demand(), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(temporal_cost(s.temporal_costs[0], 0.5), 5.0);
  EXPECT_GT(cost_scale(s), 0.0);
  EXPECT_NEAR(mass_scale(s), s.total_demand() + s.total_capacity(), 1e-12);
}
