#pragma once

#include <stmatch/domain.hpp>
#include <stmatch/envelope.hpp>

#include <string>
#include <vector>

namespace stmatch {

struct SpatialPartition {
  /// cells x types; 0 = unmatched, i + 1 = station i.
  Eigen::MatrixXi labels;
  /// stations x types demand mass of each cell.
  Matrix masses;
};

struct TimeInterval {
  double t0 = 0.0;
  double t1 = 0.0;
  double length() const { return t1 - t0; }
};

struct StationSchedule {
  std::vector<std::vector<TimeInterval>> by_type;
  std::vector<TimeInterval> idle;
};

struct TemporalPartition {
  std::vector<StationSchedule> stations;
};

struct WelfareBreakdown {
  double reward_total = 0.0;
  double spatial_cost = 0.0;
  double temporal_cost = 0.0;
  double welfare() const { return reward_total - spatial_cost - temporal_cost; }
};

struct MatchingPlan {
  SpatialPartition spatial;
  TemporalPartition temporal;
  Matrix q;           // demand mass matched to each (station, type)
  Matrix q_temporal;  // capacity mass of each temporal cell
  WelfareBreakdown welfare;
  Vector served;
  Vector uncovered;
  double consistency_residual = 0.0;  // relative to the mass scale
};

struct StructureCheck {
  bool ok = true;
  std::vector<std::string> violations;
};

SpatialPartition spatial_cells(const Scenario& scenario, const WeightMatrix& eta, double threshold);

/// Per-type interval sets and the idle set of one station, merged into maximal intervals.
StationSchedule temporal_cells(const CapacityProfile& capacity,
                               const std::vector<TemporalCostSpec>& costs, const Vector& eta_row);

/// Converts an envelope into maximal labeled intervals.
StationSchedule schedule_from_envelope(const StationEnvelope& envelope, int types);

/// Throws InconsistencyError when spatial and temporal masses differ by more than
/// 10 * tol relative to the mass scale.
MatchingPlan extract_plan(const Scenario& scenario, const WeightMatrix& eta, double tol = 1e-5);

StructureCheck check_sensitivity_priority(const MatchingPlan& plan, const Scenario& scenario);
StructureCheck check_order_preserving(const MatchingPlan& plan, const Scenario& scenario);
StructureCheck check_monotone_coverage(const MatchingPlan& plan, const Scenario& scenario);

}  // namespace stmatch
