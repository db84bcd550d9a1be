#include <stmatch/policies.hpp>
#include <stmatch/pricing.hpp>
#include <stmatch/scenarios.hpp>
#include <stmatch/solver.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stmatch;

namespace {

struct Solved {
  Scenario scenario;
  WeightMatrix eta;
  MatchingPlan plan;
};

Solved solve(const Scenario& s) {
  const SolveResult r = solve_stbd(s);
  EXPECT_TRUE(r.report.converged) << r.report.message;
  return {s, r.eta, extract_plan(s, r.eta, 1e-5)};
}

Scenario single_type() {
  Scenario s = three_type_scenario();
  s.demand = DemandField(s.grid(), Matrix::Constant(1, 1, 10.0));
  s.temporal_costs.resize(1);
  return s;
}

}  // namespace

TEST(Prices, SingleTypePeaksAtPreferredTime) {
  const Scenario s = single_type();
  const Matrix eta = Matrix::Constant(1, 1, 3.0);
  const PricingSchedule p = envy_free_prices(s, eta);
  EXPECT_NEAR(p.price(0, 0.0), 3.0, 1e-14);
  for (double t : {-9.0, -1.0, 0.5, 2.0, 9.0})
    EXPECT_NEAR(p.price(0, t), std::max(0.0, 3.0 - temporal_cost(s.temporal_costs[0], t)), 1e-12);
}

TEST(Prices, NonPositiveEtaIsFree) {
  const Scenario s = three_type_scenario();
  const PricingSchedule p = envy_free_prices(s, Matrix::Constant(1, 3, -1.0));
  for (double t = -10; t <= 10; t += 0.25) EXPECT_EQ(p.price(0, t), 0.0);
}

TEST(Prices, ThreeTypePeaksAtZeroAndDecreasesOnBothSides) {
  const Solved sv = solve(three_type_scenario());
  const PricingSchedule p = envy_free_prices(sv.scenario, sv.eta);
  const double peak = p.price(0, 0.0);
  EXPECT_NEAR(peak, sv.eta.maxCoeff(), 1e-12);
  double previous = peak;
  for (double t = 0.05; t <= 10; t += 0.05) {
    EXPECT_LE(p.price(0, t), previous + 1e-12);
    previous = p.price(0, t);
  }
  previous = peak;
  for (double t = -0.05; t >= -10; t -= 0.05) {
    EXPECT_LE(p.price(0, t), previous + 1e-12);
    previous = p.price(0, t);
  }
}

TEST(Slots, ThreeTypeHasFiveSlots) {
  const Solved sv = solve(three_type_scenario());
  const SlotSchedule slots = slot_mechanism(sv.scenario, sv.eta);
  EXPECT_EQ(slots.stations[0].size(), 5u);
  EXPECT_EQ(slots.crossing_bound, 2);
  ASSERT_TRUE(slots.slot_bound.has_value());
  EXPECT_EQ(*slots.slot_bound, 5);
  EXPECT_EQ(static_cast<int>(slots.stations[0].size()),
            oracles::argmax_runs(sv.scenario.stations[0].capacity, sv.scenario.temporal_costs, sv.eta.row(0).transpose(),
                                 400000));
}

TEST(Slots, SingleTypeOneSlotAtMeanValue) {
  const Scenario s = single_type();
  const Matrix eta = Matrix::Constant(1, 1, 3.0);
  const SlotSchedule slots = slot_mechanism(s, eta);
  ASSERT_EQ(slots.stations[0].size(), 1u);
  const Slot& slot = slots.stations[0][0];
  EXPECT_NEAR(slot.t0, -1.5, 1e-14);
  EXPECT_NEAR(slot.t1, 3.0, 1e-14);
  const double mean_cost =
      capacity_weighted_cost(s.temporal_costs[0], s.stations[0].capacity, slot.t0, slot.t1) / slot.capacity_mass;
  EXPECT_NEAR(slot.price + mean_cost, 3.0, 1e-12);
}

TEST(Slots, TwoTypesAtMostThree) {
  Scenario s = three_type_scenario();
  s.demand = DemandField(s.grid(), Matrix::Constant(1, 2, 12.0));
  s.temporal_costs.resize(2);
  const Solved sv = solve(s);
  const SlotSchedule slots = slot_mechanism(sv.scenario, sv.eta);
  EXPECT_LE(slots.stations[0].size(), 3u);
  EXPECT_EQ(*slots.slot_bound, 3);
}

TEST(Slots, BoundsByCostClass) {
  EXPECT_EQ(davenport_schinzel_length(1, 4), 4);
  EXPECT_EQ(davenport_schinzel_length(2, 4), 7);
  EXPECT_FALSE(davenport_schinzel_length(3, 4).has_value());
  Scenario s = hotelling_scenario({1, 1, 1, 1}, 2, 10, true);
  s.mode = TemporalMode::General;
  EXPECT_EQ(slot_mechanism(s, Matrix::Zero(2, 2)).crossing_bound, 3);
  s.temporal_costs[1] = PiecewiseLinearCost{{0, 2}, {0, 1}};
  EXPECT_EQ(slot_mechanism(s, Matrix::Zero(2, 2)).crossing_bound, -1);
}

TEST(Slots, PositiveLengthTieIsRejected) {
  Scenario s = three_type_scenario();
  s.mode = TemporalMode::General;
  s.temporal_costs[1] = s.temporal_costs[0];
  EXPECT_THROW(slot_mechanism(s, Matrix(Eigen::RowVector3d(3.0, 3.0, 2.0))), DegenerateTieError);
}

TEST(Envy, SolvedPlansAreEnvyFreeAndIndividuallyRational) {
  for (const Scenario& s : {three_type_scenario(), hotelling_scenario({3, 1, 10, 0.65}, 6, 200, true),
                            hotelling_scenario({1, 1, 1, 0.5}, 1, 200)}) {
    const Solved sv = solve(s);
    const PricingSchedule prices = envy_free_prices(s, sv.eta);
    const EnvyReport rep = verify_envy_free(s, sv.eta, sv.plan, prices, 5000, 42);
    const double scale = cost_scale(s);
    EXPECT_EQ(rep.agents, 5000);
    EXPECT_GT(rep.served_agents, 0);
    EXPECT_LE(rep.max_envy, 1e-9 * scale);
    EXPECT_GE(rep.min_ir, -1e-9 * scale);
  }
}

TEST(Envy, PerturbedPricesCreateEnvy) {
  const Scenario s = three_type_scenario();
  const Solved sv = solve(s);
  const PricingSchedule noisy = perturb_prices(envy_free_prices(s, sv.eta), 0.5, 3);
  const EnvyReport rep = verify_envy_free(s, sv.eta, sv.plan, noisy, 5000, 42);
  EXPECT_GT(rep.max_envy, 1e-6);
}

TEST(Envy, ResultIsSeededAndRepeatable) {
  const Scenario s = hotelling_scenario({3, 1, 10, 0.45}, 4, 100, true);
  const Solved sv = solve(s);
  const PricingSchedule prices = envy_free_prices(s, sv.eta);
  const EnvyReport a = verify_envy_free(s, sv.eta, sv.plan, prices, 2000, 5);
  const EnvyReport b = verify_envy_free(s, sv.eta, sv.plan, prices, 2000, 5);
  EXPECT_EQ(a.max_envy, b.max_envy);
  EXPECT_EQ(a.min_ir, b.min_ir);
  EXPECT_EQ(a.served_agents, b.served_agents);
}

TEST(Envy, UnmatchedAgentsHaveNoProfitableAlternative) {
  const Scenario s = hotelling_scenario({1, 1, 1, 0.5}, 1, 200);
  const Solved sv = solve(s);
  const EnvyReport rep = verify_envy_free(s, sv.eta, sv.plan, envy_free_prices(s, sv.eta), 4000, 9);
  EXPECT_LT(rep.served_agents, rep.agents);
  EXPECT_LE(rep.max_envy, 1e-9 * cost_scale(s));
}
