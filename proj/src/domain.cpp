#include <stmatch/domain.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stmatch {

namespace {

bool finite(double v) { return std::isfinite(v); }

[[noreturn]] void fail(const std::string& message) { throw ValidationError(message); }

}  // namespace

Vec2 SpatialGrid::cell_center(int cell) const {
  const int ix = cell % nx;
  const int iy = cell / nx;
  return {x_min + (ix + 0.5) * dx(), y_min + (iy + 0.5) * dy()};
}

int SpatialGrid::cell_of(const Vec2& p) const {
  int ix = static_cast<int>(std::floor((p.x() - x_min) / dx()));
  int iy = static_cast<int>(std::floor((p.y() - y_min) / dy()));
  ix = std::clamp(ix, 0, nx - 1);
  iy = std::clamp(iy, 0, ny - 1);
  return iy * nx + ix;
}

bool SpatialGrid::contains(const Vec2& p) const {
  return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
}

void SpatialGrid::validate() const {
  if (nx < 1 || ny < 1) fail("grid resolution must be at least 1 per axis");
  if (!finite(x_min) || !finite(x_max) || !finite(y_min) || !finite(y_max))
    fail("grid bounds must be finite");
  if (!(x_max > x_min) || !(y_max > y_min)) fail("grid bounds must have positive extent");
}

DemandField::DemandField(SpatialGrid grid, Matrix densities)
    : grid_(grid), densities_(std::move(densities)) {
  grid_.validate();
  if (densities_.rows() != grid_.cell_count())
    fail("demand density has " + std::to_string(densities_.rows()) + " cells, grid has " +
         std::to_string(grid_.cell_count()));
  for (Eigen::Index j = 0; j < densities_.cols(); ++j)
    for (Eigen::Index c = 0; c < densities_.rows(); ++c) {
      const double v = densities_(c, j);
      if (!finite(v)) fail("demand density must be finite (type " + std::to_string(j + 1) + ")");
      if (v < 0.0) fail("negative demand density (type " + std::to_string(j + 1) + ")");
    }
}

double DemandField::total_mass(int type) const {
  return densities_.col(type).sum() * grid_.cell_area();
}

double DemandField::total_mass() const { return densities_.sum() * grid_.cell_area(); }

CapacityProfile::CapacityProfile(std::vector<double> breakpoints, std::vector<double> rates)
    : breakpoints_(std::move(breakpoints)), rates_(std::move(rates)) {
  if (breakpoints_.size() < 2) fail("capacity profile needs at least two breakpoints");
  if (rates_.size() + 1 != breakpoints_.size())
    fail("capacity profile needs one rate per breakpoint interval");
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    if (!finite(breakpoints_[k])) fail("capacity breakpoints must be finite");
    if (k > 0 && !(breakpoints_[k] > breakpoints_[k - 1]))
      fail("capacity breakpoints not strictly increasing");
  }
  for (double r : rates_)
    if (!finite(r) || !(r > 0.0)) fail("capacity rates must be positive and finite");
}

CapacityProfile CapacityProfile::constant(double t0, double t1, double rate) {
  return CapacityProfile({t0, t1}, {rate});
}

bool CapacityProfile::is_constant() const {
  return std::all_of(rates_.begin(), rates_.end(), [&](double r) { return r == rates_.front(); });
}

double CapacityProfile::rate_at(double t) const {
  if (t < start() || t > end()) return 0.0;
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  std::size_t k = static_cast<std::size_t>(it - breakpoints_.begin());
  k = std::clamp<std::size_t>(k, 1, rates_.size());
  return rates_[k - 1];
}

double CapacityProfile::integral(double a, double b) const {
  a = std::max(a, start());
  b = std::min(b, end());
  if (!(b > a)) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < rates_.size(); ++k) {
    const double lo = std::max(a, breakpoints_[k]);
    const double hi = std::min(b, breakpoints_[k + 1]);
    if (hi > lo) sum += rates_[k] * (hi - lo);
  }
  return sum;
}

double CapacityProfile::time_at_cumulative(double mass) const {
  if (mass <= 0.0) return start();
  double acc = 0.0;
  for (std::size_t k = 0; k < rates_.size(); ++k) {
    const double piece = rates_[k] * (breakpoints_[k + 1] - breakpoints_[k]);
    if (acc + piece >= mass) return breakpoints_[k] + (mass - acc) / rates_[k];
    acc += piece;
  }
  return end();
}

CapacityProfile CapacityProfile::scaled(double factor) const {
  std::vector<double> r = rates_;
  for (double& v : r) v *= factor;
  return CapacityProfile(breakpoints_, std::move(r));
}

std::string to_string(TemporalMode mode) {
  switch (mode) {
    case TemporalMode::General: return "general";
    case TemporalMode::HomogeneousPreference: return "homogeneous_preference";
    case TemporalMode::HomogeneousSensitivity: return "homogeneous_sensitivity";
  }
  return "general";
}

TemporalMode temporal_mode_from_string(const std::string& name) {
  if (name == "general") return TemporalMode::General;
  if (name == "homogeneous_preference") return TemporalMode::HomogeneousPreference;
  if (name == "homogeneous_sensitivity") return TemporalMode::HomogeneousSensitivity;
  throw ParseError("costs.mode: unknown mode '" + name + "'");
}

double temporal_cost(const TemporalCostSpec& spec, double t) {
  if (const auto* tp = std::get_if<TwoPieceLinear>(&spec)) {
    const double tau = tp->preferred_time;
    if (t < tau) return tp->early_forbidden ? kInf : tp->sensitivity * tp->early_slope * (tau - t);
    if (t > tau) return tp->late_forbidden ? kInf : tp->sensitivity * tp->late_slope * (t - tau);
    return 0.0;
  }
  const auto& pl = std::get<PiecewiseLinearCost>(spec);
  if (t < pl.times.front() || t > pl.times.back()) return kInf;
  auto it = std::upper_bound(pl.times.begin(), pl.times.end(), t);
  std::size_t k = static_cast<std::size_t>(it - pl.times.begin());
  if (k >= pl.times.size()) return pl.values.back();
  const double w = (t - pl.times[k - 1]) / (pl.times[k] - pl.times[k - 1]);
  return (1.0 - w) * pl.values[k - 1] + w * pl.values[k];
}

double preferred_time(const TemporalCostSpec& spec) {
  if (const auto* tp = std::get_if<TwoPieceLinear>(&spec)) return tp->preferred_time;
  const auto& pl = std::get<PiecewiseLinearCost>(spec);
  auto it = std::min_element(pl.values.begin(), pl.values.end());
  return pl.times[static_cast<std::size_t>(it - pl.values.begin())];
}

std::vector<AffinePiece> affine_pieces(const TemporalCostSpec& spec, double t0, double t1) {
  std::vector<AffinePiece> out;
  auto push = [&](double a, double b, double slope, double intercept) {
    a = std::max(a, t0);
    b = std::min(b, t1);
    if (b > a) out.push_back({a, b, slope, intercept});
  };
  if (const auto* tp = std::get_if<TwoPieceLinear>(&spec)) {
    const double tau = tp->preferred_time;
    const double s = tp->sensitivity;
    if (!tp->early_forbidden) push(-kInf, tau, -s * tp->early_slope, s * tp->early_slope * tau);
    if (!tp->late_forbidden) push(tau, kInf, s * tp->late_slope, -s * tp->late_slope * tau);
    return out;
  }
  const auto& pl = std::get<PiecewiseLinearCost>(spec);
  for (std::size_t k = 0; k + 1 < pl.times.size(); ++k) {
    const double slope = (pl.values[k + 1] - pl.values[k]) / (pl.times[k + 1] - pl.times[k]);
    push(pl.times[k], pl.times[k + 1], slope, pl.values[k] - slope * pl.times[k]);
  }
  return out;
}

void validate_temporal_cost(const TemporalCostSpec& spec) {
  if (const auto* tp = std::get_if<TwoPieceLinear>(&spec)) {
    if (!finite(tp->sensitivity) || !(tp->sensitivity > 0.0)) fail("sensitivity must be positive");
    if (!tp->early_forbidden && (!finite(tp->early_slope) || tp->early_slope < 0.0))
      fail("early slope must be nonnegative");
    if (!tp->late_forbidden && (!finite(tp->late_slope) || tp->late_slope < 0.0))
      fail("late slope must be nonnegative");
    if (tp->early_forbidden && tp->late_forbidden) fail("both sides of a temporal cost are forbidden");
    if (!finite(tp->preferred_time)) fail("preferred time must be finite");
    return;
  }
  const auto& pl = std::get<PiecewiseLinearCost>(spec);
  if (pl.times.size() < 2 || pl.times.size() != pl.values.size())
    fail("piecewise-linear cost needs matching times/values with at least two knots");
  int zeros = 0;
  for (std::size_t k = 0; k < pl.times.size(); ++k) {
    if (!finite(pl.times[k]) || !finite(pl.values[k])) fail("piecewise-linear cost must be finite");
    if (k > 0 && !(pl.times[k] > pl.times[k - 1])) fail("piecewise-linear cost times not strictly increasing");
    if (pl.values[k] < 0.0) fail("piecewise-linear cost must be nonnegative");
    if (pl.values[k] == 0.0) ++zeros;
  }
  if (zeros != 1) fail("piecewise-linear cost must vanish at exactly one knot");
  double prev = -kInf;
  for (std::size_t k = 0; k + 1 < pl.times.size(); ++k) {
    const double slope = (pl.values[k + 1] - pl.values[k]) / (pl.times[k + 1] - pl.times[k]);
    if (slope < prev - 1e-12 * (1.0 + std::abs(prev))) fail("piecewise-linear cost is not convex");
    prev = slope;
  }
}

double Scenario::total_capacity() const {
  double sum = 0.0;
  for (const Station& s : stations) sum += s.capacity.total();
  return sum;
}

void Scenario::validate() const {
  if (stations.empty()) fail("scenario needs at least one station");
  if (temporal_costs.empty()) fail("scenario needs at least one demand type");
  if (demand.type_count() != type_count())
    fail("demand has " + std::to_string(demand.type_count()) + " types but " +
         std::to_string(type_count()) + " temporal costs are given");
  demand.grid().validate();
  if (!finite(reward) || reward < 0.0) fail("reward must be finite and nonnegative");
  if (!finite(spatial_cost.exponent) || spatial_cost.exponent < 1.0)
    fail("spatial cost exponent must be at least 1");
  if (!finite(spatial_cost.coefficient) || !(spatial_cost.coefficient > 0.0))
    fail("spatial cost coefficient must be positive");
  const double t0 = horizon_start();
  const double t1 = horizon_end();
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const Station& s = stations[i];
    if (!grid().contains(s.position))
      fail("station " + std::to_string(i + 1) + " lies outside the grid");
    if (s.capacity.breakpoints().size() < 2) fail("station " + std::to_string(i + 1) + " has no capacity profile");
    if (s.capacity.start() != t0 || s.capacity.end() != t1)
      fail("capacity horizons differ across stations");
  }
  for (const auto& spec : temporal_costs) validate_temporal_cost(spec);

  if (mode == TemporalMode::General) return;
  std::vector<TwoPieceLinear> tps;
  for (const auto& spec : temporal_costs) {
    const auto* tp = std::get_if<TwoPieceLinear>(&spec);
    if (!tp) fail("mode " + to_string(mode) + " requires two-piece linear temporal costs");
    tps.push_back(*tp);
  }
  const TwoPieceLinear& ref = tps.front();
  for (std::size_t j = 1; j < tps.size(); ++j) {
    const TwoPieceLinear& tp = tps[j];
    const bool same_sides = tp.early_forbidden == ref.early_forbidden &&
                            tp.late_forbidden == ref.late_forbidden &&
                            (tp.early_forbidden || tp.early_slope == ref.early_slope) &&
                            (tp.late_forbidden || tp.late_slope == ref.late_slope);
    if (!same_sides) fail("early/late slopes differ across types");
    if (mode == TemporalMode::HomogeneousPreference) {
      if (tp.preferred_time != ref.preferred_time) fail("preferred times differ across types");
      if (!(tp.sensitivity < tps[j - 1].sensitivity)) fail("sensitivities not strictly decreasing");
    } else {
      if (tp.sensitivity != ref.sensitivity) fail("sensitivities differ across types");
      for (std::size_t k = 0; k < j; ++k)
        if (tps[k].preferred_time == tp.preferred_time) fail("preferred times not distinct");
    }
  }
}

double spatial_cost(const SpatialCostSpec& spec, const Vec2& x, const Vec2& y) {
  const double d = (x - y).norm();
  if (spec.exponent == 1.0) return spec.coefficient * d;
  if (spec.exponent == 2.0) return spec.coefficient * d * d;
  return spec.coefficient * std::pow(d, spec.exponent);
}

Vec2 spatial_cost_gradient(const SpatialCostSpec& spec, const Vec2& x, const Vec2& y) {
  const Vec2 d = x - y;
  const double n = d.norm();
  if (n == 0.0) return Vec2::Zero();
  if (spec.exponent == 1.0) return spec.coefficient * d / n;
  if (spec.exponent == 2.0) return 2.0 * spec.coefficient * d;
  return spec.coefficient * spec.exponent * std::pow(n, spec.exponent - 2.0) * d;
}

double cost_scale(const Scenario& scenario) {
  const SpatialGrid& g = scenario.grid();
  double max_delta = 0.0;
  for (int c = 0; c < g.cell_count(); ++c) {
    if (scenario.demand.densities().row(c).maxCoeff() <= 0.0) continue;
    const Vec2 x = g.cell_center(c);
    for (const Station& s : scenario.stations)
      max_delta = std::max(max_delta, spatial_cost(scenario.spatial_cost, x, s.position));
  }
  double max_ell = 0.0;
  for (const auto& spec : scenario.temporal_costs)
    for (const AffinePiece& p : affine_pieces(spec, scenario.horizon_start(), scenario.horizon_end()))
      max_ell = std::max({max_ell, p.at(p.t0), p.at(p.t1)});
  const double reward_part = std::min(scenario.reward, max_delta + max_ell);
  const double scale = std::max({max_delta, max_ell, reward_part});
  return scale > 0.0 ? scale : 1.0;
}

double mass_scale(const Scenario& scenario) {
  const double s = scenario.total_demand() + scenario.total_capacity();
  return s > 0.0 ? s : 1.0;
}

}  // namespace stmatch
