#pragma once

#include <stmatch/cells.hpp>
#include <stmatch/domain.hpp>
#include <stmatch/envelope.hpp>

#include <string>
#include <vector>

namespace stmatch {

/// Objective value with its (sub)gradient and both terms reported separately.
struct ObjectiveValue {
  double value = 0.0;
  double temporal = 0.0;
  double spatial = 0.0;
  Matrix gradient;        // temporal_mass - spatial_mass
  Matrix temporal_mass;   // capacity mass of each temporal cell
  Matrix spatial_mass;    // demand mass of each spatial cell
};

struct SolveOptions {
  double tol = 1e-5;
  int max_iterations = 5000;
  bool smoothing = true;
  double eps_start = 1.0;  // in units of the cost scale
  double eps_end = 1e-3;   // in units of the cost scale
  double eps_decay = 0.5;
  double stage_tol = 1e-3;
  int stage_iterations = 200;
  int memory = 10;
};

struct SolveReport {
  double final_objective = 0.0;
  std::vector<double> gradient_norm_history;
  double mass_balance_residual = 0.0;
  int iterations = 0;
  std::vector<double> smoothing_schedule;
  bool converged = false;
  std::string message;
  double cost_scale = 1.0;
  double mass_scale = 1.0;
};

struct SolveResult {
  WeightMatrix eta;
  SolveReport report;
};

/// Precomputed temporal envelopes and spatial cell geometry for one scenario.
/// The scenario must outlive the problem.
class StbdProblem {
 public:
  explicit StbdProblem(const Scenario& scenario);

  const Scenario& scenario() const { return scenario_; }
  const TemporalModel& temporal() const { return temporal_; }
  const SpatialModel& spatial() const { return spatial_; }
  double cost_scale() const { return cost_scale_; }
  double mass_scale() const { return mass_scale_; }

  ObjectiveValue exact(const WeightMatrix& eta) const;
  ObjectiveValue smoothed(const WeightMatrix& eta, double eps) const;
  /// Largest absolute subgradient entry divided by the mass scale.
  double relative_residual(const Matrix& gradient) const;

 private:
  const Scenario& scenario_;
  TemporalModel temporal_;
  SpatialModel spatial_;
  std::vector<Vector> densities_;
  double cost_scale_;
  double mass_scale_;
};

ObjectiveValue stbd_objective(const Scenario& scenario, const WeightMatrix& eta);
ObjectiveValue stbd_smoothed(const Scenario& scenario, const WeightMatrix& eta, double eps);
/// Capacity mass of each temporal cell minus demand mass of each spatial cell.
Matrix mass_balance(const Scenario& scenario, const WeightMatrix& eta);

SolveResult solve_stbd(const Scenario& scenario, const SolveOptions& options = {});
SolveResult solve_stbd(const StbdProblem& problem, const SolveOptions& options = {});

}  // namespace stmatch
