#pragma once

#include <stmatch/domain.hpp>

#include <vector>

namespace stmatch {

/// Portion of one grid cell won by one station, in coordinates relative to the cell center.
struct CellShare {
  int station = -1;
  double area = 0.0;
  Vec2 moment = Vec2::Zero();  // integral of (x - center) over the portion
};

/// Spatial plus-max term evaluated cell by cell. Inside each cell the distance to every
/// station is replaced by its first-order expansion at the cell center, so the regions
/// won by each station are convex polygons integrated exactly. Cells that a single
/// station wins outright reduce to the midpoint rule.
class SpatialModel {
 public:
  explicit SpatialModel(const Scenario& scenario);

  int cell_count() const { return cells_; }
  int station_count() const { return stations_; }
  double cost(int cell, int station) const { return delta_(cell, station); }
  Vec2 cost_gradient(int cell, int station) const { return {grad_x_(cell, station), grad_y_(cell, station)}; }
  const SpatialGrid& grid() const { return grid_; }

  /// Splits a cell among stations maximizing threshold - w_i - delta_i (above zero when
  /// the threshold is finite). Output is appended to shares.
  void split_cell(int cell, const Vector& w, double threshold, std::vector<CellShare>& shares) const;

  /// Integral of (max_i [threshold - w_i - delta_i])^+ * mu over the grid for one density.
  /// masses receives the demand mass won by each station.
  double value(const Vector& density, const Vector& w, double threshold, Vector* masses) const;

  /// Midpoint softplus surrogate; masses receives the gradient with respect to -w.
  double smoothed(const Vector& density, const Vector& w, double threshold, double eps,
                  Vector* masses) const;

  /// Label by the midpoint rule: 1 + argmin_i (delta_i + w_i) if the minimum is at most
  /// threshold, otherwise 0.
  int midpoint_label(int cell, const Vector& w, double threshold) const;

  /// Mass won by each station and the linearized transport cost it carries.
  void masses_and_costs(const Vector& density, const Vector& w, double threshold, Vector& masses,
                        Vector& costs) const;

 private:
  SpatialGrid grid_;
  int cells_ = 0;
  int stations_ = 0;
  Matrix delta_;
  Matrix grad_x_;
  Matrix grad_y_;
};

}  // namespace stmatch
