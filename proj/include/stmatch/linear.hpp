#pragma once

#include <stmatch/partition.hpp>
#include <stmatch/solver.hpp>

namespace stmatch {

/// Early/late slopes of a two-piece linear cost; an infinite side is a flag, not a float.
struct SlopePair {
  double early = 1.0;
  double late = 1.0;
  bool early_infinite = false;
  bool late_infinite = false;
};

/// Harmonic-mean scale 2bh / (b + h), or 2h / 2b when one side is infinite.
double harmonic_beta(const SlopePair& slopes);

/// A_ij = s_max(i,j) and its tridiagonal inverse.
struct SensitivityMatrix {
  Vector s;
  Matrix A;
  Matrix A_inverse;
  double beta = 0.0;
};

SensitivityMatrix build_A_inverse(const Vector& s, const SlopePair& slopes);

/// A^{-1} v in O(m) using the tridiagonal structure.
Vector apply_A_inverse(const Vector& s, const Vector& v);

/// Parameters shared by every type and station under slack constant capacities.
struct LinearModel {
  Vector s;
  SlopePair slopes;
  double beta = 0.0;
  double preferred_time = 0.0;
  Vector rates;  // constant capacity rate per station
};

/// Throws AssumptionError unless costs are two-piece linear with a common preferred time and
/// decreasing sensitivities, capacities are constant and the horizon holds any schedule.
LinearModel check_linear_assumptions(const Scenario& scenario);

/// Quadratic temporal term plus the spatial term; gradient = temporal masses - spatial masses.
ObjectiveValue linear_objective(const Scenario& scenario, const WeightMatrix& eta);

/// Nested service boundaries relative to the preferred time, and the minimal temporal cost.
struct ClosedFormSchedule {
  Vector t_plus;
  Vector t_minus;
  double cost = 0.0;
};

ClosedFormSchedule closed_form_schedule(const Vector& q, const Vector& s, const SlopePair& slopes,
                                        double rate);

struct LinearSolveResult {
  WeightMatrix eta;
  MatchingPlan plan;
  SolveReport report;
};

LinearSolveResult solve_linear(const Scenario& scenario, const SolveOptions& options = {});

}  // namespace stmatch
