#pragma once

#include <stmatch/common.hpp>

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace stmatch {

/// Uniform rectangular grid; cell index = iy * nx + ix.
struct SpatialGrid {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  int nx = 1;
  int ny = 1;

  int cell_count() const { return nx * ny; }
  double dx() const { return (x_max - x_min) / nx; }
  double dy() const { return (y_max - y_min) / ny; }
  double cell_area() const { return dx() * dy(); }
  Vec2 cell_center(int cell) const;
  int cell_of(const Vec2& p) const;
  bool contains(const Vec2& p) const;
  void validate() const;
};

/// Per-type demand density on a grid, stored as a cells x types matrix.
class DemandField {
 public:
  DemandField() = default;
  DemandField(SpatialGrid grid, Matrix densities);

  const SpatialGrid& grid() const { return grid_; }
  const Matrix& densities() const { return densities_; }
  int type_count() const { return static_cast<int>(densities_.cols()); }
  int cell_count() const { return grid_.cell_count(); }
  double density(int cell, int type) const { return densities_(cell, type); }
  double cell_mass(int cell, int type) const { return densities_(cell, type) * grid_.cell_area(); }
  double total_mass(int type) const;
  double total_mass() const;

 private:
  SpatialGrid grid_;
  Matrix densities_;
};

/// Piecewise-constant service rate on [breakpoints.front(), breakpoints.back()].
class CapacityProfile {
 public:
  CapacityProfile() = default;
  CapacityProfile(std::vector<double> breakpoints, std::vector<double> rates);
  static CapacityProfile constant(double t0, double t1, double rate);

  double start() const { return breakpoints_.front(); }
  double end() const { return breakpoints_.back(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& rates() const { return rates_; }
  bool is_constant() const;

  double rate_at(double t) const;
  double integral(double a, double b) const;
  double total() const { return integral(start(), end()); }
  /// Smallest t with integral(start, t) == mass; mass is clamped to [0, total].
  double time_at_cumulative(double mass) const;
  CapacityProfile scaled(double factor) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> rates_;
};

/// s * (b * (tau - t)^+ + h * (t - tau)^+); a forbidden side has infinite cost.
struct TwoPieceLinear {
  double sensitivity = 1.0;
  double early_slope = 1.0;
  double late_slope = 1.0;
  double preferred_time = 0.0;
  bool early_forbidden = false;
  bool late_forbidden = false;
};

/// Convex interpolant through (times, values); infinite outside the knots.
struct PiecewiseLinearCost {
  std::vector<double> times;
  std::vector<double> values;
};

using TemporalCostSpec = std::variant<TwoPieceLinear, PiecewiseLinearCost>;

/// delta(x, y) = coefficient * |x - y|^exponent.
struct SpatialCostSpec {
  double exponent = 1.0;
  double coefficient = 1.0;
};

struct Station {
  Vec2 position = Vec2::Zero();
  CapacityProfile capacity;
  std::string name;
};

enum class TemporalMode {
  General,
  HomogeneousPreference,  // common preferred time, strictly decreasing sensitivities
  HomogeneousSensitivity  // common shape, distinct preferred times
};

std::string to_string(TemporalMode mode);
TemporalMode temporal_mode_from_string(const std::string& name);

/// Affine function intercept + slope * t on [t0, t1].
struct AffinePiece {
  double t0 = 0.0;
  double t1 = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double at(double t) const { return intercept + slope * t; }
};

struct Scenario {
  DemandField demand;
  std::vector<Station> stations;
  std::vector<TemporalCostSpec> temporal_costs;
  SpatialCostSpec spatial_cost;
  double reward = 0.0;
  TemporalMode mode = TemporalMode::General;

  int station_count() const { return static_cast<int>(stations.size()); }
  int type_count() const { return static_cast<int>(temporal_costs.size()); }
  const SpatialGrid& grid() const { return demand.grid(); }
  double horizon_start() const { return stations.front().capacity.start(); }
  double horizon_end() const { return stations.front().capacity.end(); }
  double total_demand() const { return demand.total_mass(); }
  double total_capacity() const;

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;
};

double temporal_cost(const TemporalCostSpec& spec, double t);
double preferred_time(const TemporalCostSpec& spec);
/// Finite affine pieces of the cost restricted to [t0, t1]; forbidden parts are omitted.
std::vector<AffinePiece> affine_pieces(const TemporalCostSpec& spec, double t0, double t1);
void validate_temporal_cost(const TemporalCostSpec& spec);

double spatial_cost(const SpatialCostSpec& spec, const Vec2& x, const Vec2& y);
Vec2 spatial_cost_gradient(const SpatialCostSpec& spec, const Vec2& x, const Vec2& y);

/// Midpoint rule: sum over cells of weight(center) * mu_j * cell area.
template <class Weight>
double spatial_integral(const DemandField& field, int type, Weight&& weight) {
  const SpatialGrid& g = field.grid();
  double sum = 0.0;
  for (int c = 0; c < g.cell_count(); ++c) {
    const double mu = field.density(c, type);
    if (mu != 0.0) sum += weight(g.cell_center(c)) * mu;
  }
  return sum * g.cell_area();
}

/// Characteristic cost magnitude used for smoothing schedules and tolerances.
double cost_scale(const Scenario& scenario);
/// Total demand plus total capacity; the normalizer of mass-balance residuals.
double mass_scale(const Scenario& scenario);

}  // namespace stmatch
