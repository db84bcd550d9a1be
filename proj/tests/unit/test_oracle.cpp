#include <stmatch/oracle.hpp>
#include <stmatch/scenarios.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace stmatch;

namespace {

DiscreteInstance hand_instance(const std::vector<double>& masses, const std::vector<double>& capacities,
                               const std::vector<std::vector<double>>& values) {
  DiscreteInstance d;
  for (std::size_t a = 0; a < masses.size(); ++a) d.atoms.push_back({static_cast<int>(a), 0, masses[a]});
  for (std::size_t b = 0; b < capacities.size(); ++b) d.bins.push_back({0, double(b), double(b + 1), capacities[b]});
  for (std::size_t a = 0; a < masses.size(); ++a)
    for (std::size_t b = 0; b < capacities.size(); ++b)
      d.variables.push_back({static_cast<int>(a), static_cast<int>(b), values[a][b]});
  return d;
}

void expect_certified(const DiscreteInstance& d, const LpSolution& s) {
  Vector atom_use = Vector::Zero(d.atoms.size()), bin_use = Vector::Zero(d.bins.size());
  double primal = 0.0;
  for (std::size_t k = 0; k < d.variables.size(); ++k) {
    const OracleVariable& v = d.variables[k];
    EXPECT_GE(s.flows[k], -1e-12);
    atom_use[v.atom] += s.flows[k];
    bin_use[v.bin] += s.flows[k];
    primal += v.value * s.flows[k];
    EXPECT_GE(s.atom_duals[v.atom] + s.bin_duals[v.bin], v.value - 1e-9);
  }
  for (std::size_t a = 0; a < d.atoms.size(); ++a) EXPECT_LE(atom_use[a], d.atoms[a].mass + 1e-9);
  for (std::size_t b = 0; b < d.bins.size(); ++b) EXPECT_LE(bin_use[b], d.bins[b].capacity + 1e-9);
  double dual = 0.0;
  for (std::size_t a = 0; a < d.atoms.size(); ++a) dual += s.atom_duals[a] * d.atoms[a].mass;
  for (std::size_t b = 0; b < d.bins.size(); ++b) dual += s.bin_duals[b] * d.bins[b].capacity;
  EXPECT_NEAR(primal, s.value, 1e-9 * std::max(1.0, s.value));
  EXPECT_NEAR(dual, s.value, 1e-7 * std::max(1.0, s.value));
  EXPECT_LE(s.certificate_gap, 1e-7);
}

}  // namespace

TEST(Discretize, VariableCounts) {
  Scenario s;
  s.demand = DemandField(SpatialGrid{0, 1, 0, 1, 2, 2}, Matrix::Constant(4, 1, 1.0));
  Station st;
  st.position = Vec2(0.5, 0.5);
  st.capacity = CapacityProfile::constant(0, 2, 1);
  s.stations.push_back(st);
  s.temporal_costs.push_back(TwoPieceLinear{});
  s.reward = 5;
  EXPECT_EQ(discretize(s, 2).variables.size(), 8u);
  s.demand = DemandField(s.grid(), Matrix::Zero(4, 1));
  EXPECT_TRUE(discretize(s, 2).atoms.empty());
  EXPECT_EQ(discretize(hotelling_scenario({1, 1, 1, 0.5}, 1, 50), 20).variables.size(), 2000u);
}

TEST(Discretize, CapacitiesAreRateTimesLength) {
  const DiscreteInstance d = discretize(hotelling_scenario({3, 1, 1, 0.5}, 1, 10), 4);
  double total = 0.0;
  for (const TimeBin& b : d.bins) total += b.capacity;
  EXPECT_NEAR(total, 4.0, 1e-12);
}

TEST(Discretize, CapIsEnforced) {
  EXPECT_THROW(discretize(hotelling_scenario({1, 1, 1, 0.5}, 1, 50), 20, 1999), SizeLimitError);
}

TEST(SolveLp, SingleVariable) {
  const DiscreteInstance d = hand_instance({1}, {1}, {{3}});
  const LpSolution s = solve_lp(d);
  EXPECT_NEAR(s.value, 3.0, 1e-12);
  EXPECT_NEAR(s.flows[0], 1.0, 1e-12);
  expect_certified(d, s);
}

TEST(SolveLp, NegativeValuesLeaveEverythingUnmatched) {
  const DiscreteInstance d = hand_instance({1, 2}, {1, 1}, {{-1, -2}, {-0.5, -3}});
  const LpSolution s = solve_lp(d);
  EXPECT_EQ(s.value, 0.0);
  EXPECT_EQ(s.flows.cwiseAbs().sum(), 0.0);
}

TEST(SolveLp, GreedyOnSharedBin) {
  const DiscreteInstance d = hand_instance({1, 1}, {1}, {{3}, {2}});
  const LpSolution s = solve_lp(d);
  EXPECT_NEAR(s.value, 3.0, 1e-12);
  EXPECT_NEAR(s.flows[0], 1.0, 1e-12);
  EXPECT_NEAR(s.flows[1], 0.0, 1e-12);
  expect_certified(d, s);
}

TEST(SolveLp, RandomInstancesCarryCertificates) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int atoms = 2 + trial % 5, bins = 1 + trial % 4;
    std::vector<double> masses(atoms), caps(bins);
    std::vector<std::vector<double>> values(atoms, std::vector<double>(bins));
    for (double& m : masses) m = u(rng);
    for (double& c : caps) c = u(rng);
    for (auto& row : values)
      for (double& v : row) v = 2 * u(rng) - 0.5;
    const DiscreteInstance d = hand_instance(masses, caps, values);
    expect_certified(d, solve_lp(d));
  }
}

TEST(SolveLp, RespectsCap) {
  const DiscreteInstance d = hand_instance({1, 1}, {1}, {{3}, {2}});
  EXPECT_THROW(solve_lp(d, 1), SizeLimitError);
}

TEST(Parity, ZeroDemandHasZeroGap) {
  auto make = [](int) {
    Scenario s = hotelling_scenario({1, 1, 1, 0.5}, 1, 10);
    s.demand = DemandField(s.grid(), Matrix::Zero(10, 1));
    return s;
  };
  const auto rows = oracle_parity(make, {{1, 5}});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].lp_value, 0.0);
  EXPECT_NEAR(rows[0].gap, 0.0, 1e-12);
}

TEST(Parity, HotellingGapShrinksUnderRefinement) {
  auto make = [](int level) { return hotelling_scenario({1, 1, 1, 0.5}, 1, level == 0 ? 50 : 100); };
  const auto rows = oracle_parity(make, {{0, 20}, {1, 40}});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LE(rows[1].gap, rows[0].gap);
  EXPECT_LE(rows[1].gap, 1e-2);
  for (const ParityRow& r : rows) EXPECT_LE(r.certificate_gap, 1e-7);
}
