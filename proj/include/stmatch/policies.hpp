#pragma once

#include <stmatch/partition.hpp>
#include <stmatch/solver.hpp>

#include <string>
#include <vector>

namespace stmatch {

/// Demand mass each station receives per type and the transport cost it carries.
struct SpatialAssignment {
  Matrix mass;  // stations x types
  Matrix cost;  // stations x types
  bool scaled = false;         // capacity short of demand; every type served pro rata
  double served_fraction = 1.0;
};

/// Transport-only assignment of all types merged, subject to each station's horizon capacity.
SpatialAssignment assign_capacity_rule(const Scenario& scenario, const SolveOptions& options = {});

/// Nearest station, capacity ignored.
SpatialAssignment assign_distance_rule(const Scenario& scenario);

struct ScheduleOutcome {
  Matrix served;          // stations x types
  Matrix temporal_cost;   // stations x types, expected total
  /// Service bands per station and type; empty for random scheduling.
  std::vector<std::vector<std::vector<TimeInterval>>> bands;
};

/// Spreads each station's load in proportion to its capacity rate; overflow is trimmed pro rata.
ScheduleOutcome schedule_random(const SpatialAssignment& assignment, const Scenario& scenario);

/// Serves types in decreasing urgency from the start of the horizon; overflow is trimmed
/// from the least urgent type first.
ScheduleOutcome schedule_priority(const SpatialAssignment& assignment, const Scenario& scenario);

/// Type indices from most to least urgent (sensitivity for two-piece costs, else index order).
std::vector<int> urgency_order(const Scenario& scenario);

/// Integral of l(t) c(t) over [a, b]; infinite if the cost is infinite where c > 0.
double capacity_weighted_cost(const TemporalCostSpec& cost, const CapacityProfile& capacity, double a, double b);

/// Per-capita costs among served demand; uncovered rates are fractions of total demand.
struct PolicyOutcome {
  std::string policy;
  double spatial = 0.0;
  double temporal = 0.0;
  double total = 0.0;
  double uncovered_total = 0.0;
  Vector uncovered_by_type;
  double served = 0.0;
};

PolicyOutcome evaluate_policy(const std::string& name, const SpatialAssignment& assignment,
                              const ScheduleOutcome& schedule, const Scenario& scenario);
PolicyOutcome evaluate_plan(const std::string& name, const MatchingPlan& plan, const Scenario& scenario);

inline const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"Spatiotemporal", "Capacity_Priority", "Capacity_Random",
                                              "Distance_Priority", "Distance_Random"};
  return names;
}

struct PolicyComparison {
  std::vector<PolicyOutcome> rows;
  bool dominance_ok = true;
  std::vector<std::string> violations;
  double tolerance = 0.0;
};

/// Runs the selected policies (all when empty). Dominance compares Spatiotemporal's total
/// with every benchmark within 1e-6 of the cost scale.
PolicyComparison compare_policies(const Scenario& scenario, const std::vector<std::string>& selected = {},
                                  const SolveOptions& options = {});

}  // namespace stmatch
