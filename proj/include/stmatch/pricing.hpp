#pragma once

#include <stmatch/partition.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace stmatch {

/// Linear price piece p(t) on [t0, t1] with endpoint values p0, p1.
struct PriceSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  double p0 = 0.0;
  double p1 = 0.0;
  double at(double t) const {
    return t1 > t0 ? p0 + (p1 - p0) * (t - t0) / (t1 - t0) : p0;
  }
};

struct PricingSchedule {
  std::vector<std::vector<PriceSegment>> stations;
  /// Price at t; at a shared breakpoint the later segment wins.
  double price(int station, double t) const;
};

/// p_i(t) = max(0, max_j [eta_ij - l_j(t)]) on the envelope breakpoints.
PricingSchedule envy_free_prices(const Scenario& scenario, const WeightMatrix& eta);

struct Slot {
  double t0 = 0.0;
  double t1 = 0.0;
  int type = 0;
  double price = 0.0;
  double capacity_mass = 0.0;
};

struct SlotSchedule {
  std::vector<std::vector<Slot>> stations;
  int crossing_bound = 2;
  std::optional<int> slot_bound;  // lambda_s(m) when known
};

/// Longest Davenport-Schinzel sequence for s in {1, 2}; empty for larger orders.
std::optional<int> davenport_schinzel_length(int s, int m);

/// Maximal intervals with a unique served type, priced at the capacity-weighted mean of
/// eta - l. Throws DegenerateTieError on a positive-length tie.
SlotSchedule slot_mechanism(const Scenario& scenario, const WeightMatrix& eta);

struct EnvyReport {
  double max_envy = -kInf;
  double min_ir = kInf;
  int agents = 0;
  int served_agents = 0;
};

/// Samples agents proportionally to demand, places served agents uniformly in capacity
/// mass on their temporal cell, and compares their utility with the best alternative
/// (station, time) under the given prices.
EnvyReport verify_envy_free(const Scenario& scenario, const WeightMatrix& eta, const MatchingPlan& plan,
                            const PricingSchedule& prices, int agents, std::uint64_t seed);

/// Adds independent uniform noise in [0, amplitude] at every breakpoint.
PricingSchedule perturb_prices(const PricingSchedule& prices, double amplitude, std::uint64_t seed);

}  // namespace stmatch
