#pragma once

#include <stmatch/solver.hpp>

#include <vector>

namespace stmatch {

struct AllocationResult {
  Vector scales;              // a_i
  WeightMatrix eta;
  double objective = 0.0;     // Psi(eta) + B * max_i Z_i(eta) / xi_i
  double welfare = 0.0;       // equals the objective at the optimum
  Vector normalized_load;     // Z_i(eta) / xi_i
  std::vector<int> binding;   // 0-based stations attaining the max
  bool degenerate = false;    // no demand served; scales are zero
  SolveReport report;
};

/// Splits budget B across stations whose capacity profiles are taken as the normalized
/// shapes c̄_i, minimizing Psi(eta) + B * max_i Z_i(eta) / xi_i.
/// Throws ValidationError when B <= 0 or some xi_i <= 0.
AllocationResult solve_capacity_allocation(const Scenario& scenario, double budget, const Vector& xi,
                                           const SolveOptions& options = {});

/// Capacities proportional to nearest-station demand mass. Requires a single type.
Vector optimal_capacity_single_type(const Scenario& scenario, double budget);

enum class Configuration { Dispersion, Concentration };

const char* to_string(Configuration c);

struct DispersionVerdict {
  Configuration verdict = Configuration::Dispersion;
  double threshold = kInf;  // c0 above which concentration wins; infinite when c1 c2 >= w^2
  double dispersion_cost = 0.0;
  double concentration_cost = 0.0;
  double dispersion_welfare = 0.0;
  double concentration_welfare = 0.0;
  double reward = 0.0;
};

/// Two Hotelling stations (c1, c2) versus one station at 0 with c1 + c2 + c0, complete
/// service. A non-positive reward is replaced by the smallest reward serving everyone
/// in both designs.
DispersionVerdict dispersion_vs_concentration(double c1, double c2, double w, double c0, double reward = 0.0);

struct DispersionBounds {
  bool dispersion_sufficient = false;
  bool concentration_sufficient = false;
};

DispersionBounds dispersion_bounds_general(double eta1, double eta2, double c1, double c2, double D);

/// max |delta(x, y_1) - delta(x, y_2)| over cell centers and corners of the grid.
double spatial_difference_bound(const Scenario& scenario, int station1 = 0, int station2 = 1);

}  // namespace stmatch
