#include <stmatch/scenarios.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace stmatch {

void GeneratorSpec::validate() const {
  grid.validate();
  if (blobs_per_type < 0) throw ValidationError("generator: blobs_per_type must be nonnegative");
  if (site_classes.empty()) throw ValidationError("generator: at least one site class is required");
  double share = 0.0;
  for (const SiteClass& c : site_classes) {
    if (c.count < 1) throw ValidationError("generator: site class '" + c.name + "' needs at least one site");
    if (!(c.capacity_share > 0.0)) throw ValidationError("generator: capacity shares must be positive");
    share += c.capacity_share;
  }
  if (std::abs(share - 1.0) > 1e-9) throw ValidationError("generator: capacity shares must sum to 1");
  if (capacity_pieces < 1) throw ValidationError("generator: capacity_pieces must be positive");
  if (!(hump_peak > 0.0 && hump_peak < 1.0)) throw ValidationError("generator: hump_peak must lie in (0, 1)");
  if (!(horizon_end > horizon_start)) throw ValidationError("generator: empty horizon");
  if (!(total_demand >= 0.0)) throw ValidationError("generator: total_demand must be nonnegative");
  if (!(capacity_ratio > 0.0)) throw ValidationError("generator: capacity_ratio must be positive");
  const std::size_t types = sensitivities.empty() ? ages.size() : sensitivities.size();
  if (types == 0) throw ValidationError("generator: no demand types");
  if (type_weights.size() != types)
    throw ValidationError("generator: type_weights must have one entry per type");
  for (double w : type_weights)
    if (!(w >= 0.0)) throw ValidationError("generator: type weights must be nonnegative");
  if (!(cost_base > 0.0)) throw ValidationError("generator: cost_base must be positive");
}

double ifr_percent(double age) { return std::pow(10.0, -3.27 + 0.0524 * age); }

GeneratorSpec vaccination_spec(std::uint64_t seed) {
  GeneratorSpec spec;
  spec.seed = seed;
  return spec;
}

Scenario generate(const GeneratorSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const SpatialGrid& g = spec.grid;
  const double width = g.x_max - g.x_min;
  const double height = g.y_max - g.y_min;
  auto inner_point = [&] {
    return Vec2(g.x_min + (0.1 + 0.8 * unif(rng)) * width, g.y_min + (0.1 + 0.8 * unif(rng)) * height);
  };

  std::vector<double> sens = spec.sensitivities;
  if (sens.empty())
    for (double age : spec.ages) sens.push_back(spec.cost_base * (1.0 + 2.0 * ifr_percent(age)));
  const int m = static_cast<int>(sens.size());
  const double weight_sum = std::accumulate(spec.type_weights.begin(), spec.type_weights.end(), 0.0);

  Matrix dens = Matrix::Zero(g.cell_count(), m);
  for (int j = 0; j < m; ++j) {
    for (int b = 0; b < spec.blobs_per_type; ++b) {
      const Vec2 center = inner_point();
      const double sigma = (0.08 + 0.12 * unif(rng)) * std::min(width, height);
      const double weight = 0.5 + unif(rng);
      for (int c = 0; c < g.cell_count(); ++c)
        dens(c, j) += weight * std::exp(-(g.cell_center(c) - center).squaredNorm() / (2.0 * sigma * sigma));
    }
    const double mass = dens.col(j).sum() * g.cell_area();
    const double target = weight_sum > 0.0 ? spec.total_demand * spec.type_weights[j] / weight_sum : 0.0;
    if (mass > 0.0) dens.col(j) *= target / mass;
  }

  const int pieces = spec.capacity_shape == CapacityShape::Hump ? spec.capacity_pieces : 1;
  const double t0 = spec.horizon_start;
  const double t1 = spec.horizon_end;
  std::vector<double> breakpoints(pieces + 1), shape(pieces);
  for (int k = 0; k <= pieces; ++k) breakpoints[k] = k == pieces ? t1 : t0 + (t1 - t0) * k / pieces;
  for (int k = 0; k < pieces; ++k) {
    const double u = (k + 0.5) / pieces;
    shape[k] = spec.capacity_shape == CapacityShape::Constant ? 1.0
               : u <= spec.hump_peak ? 0.3 + 0.7 * u / spec.hump_peak
                                     : 1.0 - 0.6 * (u - spec.hump_peak) / (1.0 - spec.hump_peak);
  }
  double shape_mass = 0.0;
  for (int k = 0; k < pieces; ++k) shape_mass += shape[k] * (breakpoints[k + 1] - breakpoints[k]);
  const double total_capacity = spec.capacity_ratio * spec.total_demand;

  Scenario s;
  s.demand = DemandField(g, dens);
  s.spatial_cost = spec.spatial_cost;
  s.mode = TemporalMode::HomogeneousPreference;
  for (const SiteClass& cls : spec.site_classes) {
    const double per_site = total_capacity * cls.capacity_share / cls.count;
    std::vector<double> rates(pieces);
    for (int k = 0; k < pieces; ++k) rates[k] = per_site * shape[k] / shape_mass;
    for (int k = 0; k < cls.count; ++k) {
      Station st;
      st.position = inner_point();
      st.capacity = CapacityProfile(breakpoints, rates);
      st.name = cls.name + "_" + std::to_string(k + 1);
      s.stations.push_back(std::move(st));
    }
  }
  for (int j = 0; j < m; ++j) {
    TwoPieceLinear cost;
    cost.sensitivity = sens[j];
    cost.late_slope = 1.0;
    cost.early_slope = 0.0;
    cost.early_forbidden = true;
    cost.preferred_time = t0;
    s.temporal_costs.push_back(cost);
  }
  if (spec.reward > 0.0) {
    s.reward = spec.reward;
  } else {
    double max_delta = 0.0;
    for (int c = 0; c < g.cell_count(); ++c)
      for (const Station& st : s.stations)
        max_delta = std::max(max_delta, spatial_cost(s.spatial_cost, g.cell_center(c), st.position));
    double max_ell = 0.0;
    for (const TemporalCostSpec& cost : s.temporal_costs) max_ell = std::max(max_ell, temporal_cost(cost, t1));
    s.reward = max_delta + max_ell + 1.0;
  }
  s.validate();
  return s;
}

Scenario hotelling_scenario(const HotellingParams& params, int types, int cells, bool uniform_sensitivity) {
  validate(params);
  if (types < 1 || cells < 1) throw ValidationError("hotelling scenario needs positive types and cells");
  const SpatialGrid grid{0.0, 1.0, -0.5, 0.5, cells, 1};
  Scenario s;
  s.demand = DemandField(grid, Matrix::Constant(cells, types, 1.0 / types));
  const double horizon = 1.0 / std::min(params.c1, params.c2);
  for (int i = 0; i < 2; ++i) {
    Station st;
    st.position = Vec2(i == 0 ? 0.0 : 1.0, 0.0);
    st.capacity = CapacityProfile::constant(0.0, horizon, i == 0 ? params.c1 : params.c2);
    st.name = i == 0 ? "left" : "right";
    s.stations.push_back(std::move(st));
  }
  for (int j = 0; j < types; ++j) {
    TwoPieceLinear cost;
    cost.sensitivity = uniform_sensitivity ? (types - j - 0.5) / types : 1.0;
    cost.late_slope = params.w;
    cost.early_slope = 0.0;
    cost.early_forbidden = true;
    cost.preferred_time = 0.0;
    s.temporal_costs.push_back(cost);
  }
  s.spatial_cost = {1.0, 1.0};
  s.reward = params.r;
  s.mode = uniform_sensitivity || types == 1 ? TemporalMode::HomogeneousPreference : TemporalMode::General;
  s.validate();
  return s;
}

Scenario three_type_scenario() {
  const SpatialGrid grid{-0.5, 0.5, -0.5, 0.5, 1, 1};
  Matrix dens(1, 3);
  dens << 12.0, 15.0, 19.0;
  Scenario s;
  s.demand = DemandField(grid, dens);
  Station st;
  st.position = Vec2::Zero();
  st.capacity = CapacityProfile::constant(-10.0, 10.0, 8.0);
  st.name = "station";
  s.stations.push_back(std::move(st));
  for (double sens : {1.0, 0.7, 0.5}) {
    TwoPieceLinear cost;
    cost.sensitivity = sens;
    cost.early_slope = 2.0;
    cost.late_slope = 1.0;
    cost.preferred_time = 0.0;
    s.temporal_costs.push_back(cost);
  }
  s.spatial_cost = {1.0, 1.0};
  s.reward = 1000.0;
  s.mode = TemporalMode::HomogeneousPreference;
  s.validate();
  return s;
}

}  // namespace stmatch
