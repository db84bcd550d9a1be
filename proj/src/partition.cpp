#include <stmatch/cells.hpp>
#include <stmatch/partition.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace stmatch {

namespace {

void append_interval(std::vector<TimeInterval>& list, double t0, double t1) {
  if (!(t1 > t0)) return;
  if (!list.empty() && std::abs(list.back().t1 - t0) <= 1e-12 * (1.0 + std::abs(t0))) {
    list.back().t1 = t1;
    return;
  }
  list.push_back({t0, t1});
}

void require_mode(const Scenario& scenario, TemporalMode mode, const char* what) {
  if (scenario.mode != mode)
    throw AssumptionError(std::string(what) + " requires " + to_string(mode) + " mode, scenario is " +
                          to_string(scenario.mode));
}

}  // namespace

SpatialPartition spatial_cells(const Scenario& scenario, const WeightMatrix& eta, double threshold) {
  const SpatialModel model(scenario);
  const int m = scenario.type_count();
  SpatialPartition out;
  out.labels.resize(model.cell_count(), m);
  out.masses.setZero(scenario.station_count(), m);
  Vector masses, costs;
  for (int j = 0; j < m; ++j) {
    const Vector w = eta.col(j);
    for (int c = 0; c < model.cell_count(); ++c) out.labels(c, j) = model.midpoint_label(c, w, threshold);
    model.masses_and_costs(scenario.demand.densities().col(j), w, threshold, masses, costs);
    out.masses.col(j) = masses;
  }
  return out;
}

StationSchedule schedule_from_envelope(const StationEnvelope& envelope, int types) {
  StationSchedule out;
  out.by_type.resize(types);
  for (const EnvelopeSegment& seg : envelope) {
    if (seg.winner >= 0) append_interval(out.by_type[seg.winner], seg.t0, seg.t1);
    else append_interval(out.idle, seg.t0, seg.t1);
  }
  return out;
}

StationSchedule temporal_cells(const CapacityProfile& capacity,
                               const std::vector<TemporalCostSpec>& costs, const Vector& eta_row) {
  const TemporalModel model({capacity}, costs);
  return schedule_from_envelope(model.envelope(0, eta_row), static_cast<int>(costs.size()));
}

MatchingPlan extract_plan(const Scenario& scenario, const WeightMatrix& eta, double tol) {
  const int n = scenario.station_count();
  const int m = scenario.type_count();
  const SpatialModel spatial(scenario);
  const TemporalModel temporal(scenario);
  MatchingPlan plan;
  plan.spatial.labels.resize(spatial.cell_count(), m);
  plan.q.setZero(n, m);
  plan.q_temporal.setZero(n, m);
  Vector masses, costs;
  for (int j = 0; j < m; ++j) {
    const Vector w = eta.col(j);
    for (int c = 0; c < spatial.cell_count(); ++c)
      plan.spatial.labels(c, j) = spatial.midpoint_label(c, w, scenario.reward);
    spatial.masses_and_costs(scenario.demand.densities().col(j), w, scenario.reward, masses, costs);
    plan.q.col(j) = masses;
    plan.welfare.spatial_cost += costs.sum();
  }
  plan.spatial.masses = plan.q;
  plan.welfare.reward_total = scenario.reward * plan.q.sum();

  for (int i = 0; i < n; ++i) {
    const Vector row = eta.row(i).transpose();
    const StationEnvelope env = temporal.envelope(i, row);
    for (const EnvelopeSegment& seg : env) {
      if (seg.winner < 0) continue;
      plan.q_temporal(i, seg.winner) += seg.capacity_mass();
      plan.welfare.temporal_cost += seg.capacity_mass() * row[seg.winner] - seg.value_integral();
    }
    plan.temporal.stations.push_back(schedule_from_envelope(env, m));
  }

  plan.served = plan.q.colwise().sum().transpose();
  plan.uncovered.resize(m);
  for (int j = 0; j < m; ++j)
    plan.uncovered[j] = std::max(0.0, scenario.demand.total_mass(j) - plan.served[j]);
  plan.consistency_residual =
      (n * m > 0) ? (plan.q - plan.q_temporal).lpNorm<Eigen::Infinity>() / mass_scale(scenario) : 0.0;
  if (plan.consistency_residual > 10.0 * tol) {
    std::ostringstream msg;
    msg << "spatial and temporal masses disagree: relative residual " << plan.consistency_residual
        << " exceeds " << 10.0 * tol;
    throw InconsistencyError(msg.str());
  }
  return plan;
}

StructureCheck check_sensitivity_priority(const MatchingPlan& plan, const Scenario& scenario) {
  require_mode(scenario, TemporalMode::HomogeneousPreference, "sensitivity priority check");
  StructureCheck out;
  const double tau = preferred_time(scenario.temporal_costs.front());
  const double tol = 1e-9 * (1.0 + scenario.horizon_end() - scenario.horizon_start());
  const int m = scenario.type_count();
  for (std::size_t i = 0; i < plan.temporal.stations.size(); ++i) {
    const StationSchedule& st = plan.temporal.stations[i];
    for (int side = 0; side < 2; ++side) {
      std::vector<double> near(m, kInf), far(m, -kInf);
      for (int j = 0; j < m; ++j)
        for (const TimeInterval& iv : st.by_type[j]) {
          const double a = side == 0 ? std::max(iv.t0, tau) : std::min(iv.t1, tau);
          const double b = side == 0 ? iv.t1 : iv.t0;
          if (side == 0 ? !(b > a) : !(a > b)) continue;
          near[j] = std::min(near[j], std::abs(a - tau));
          far[j] = std::max(far[j], std::abs(b - tau));
        }
      for (int hi = 0; hi < m; ++hi)
        for (int lo = hi + 1; lo < m; ++lo) {
          if (near[hi] == kInf || near[lo] == kInf) continue;
          if (far[hi] > near[lo] + tol) {
            std::ostringstream msg;
            msg << "station " << i + 1 << (side == 0 ? " late" : " early") << " side: type " << hi + 1
                << " served farther from the preferred time than less sensitive type " << lo + 1;
            out.violations.push_back(msg.str());
          }
        }
    }
  }
  out.ok = out.violations.empty();
  return out;
}

StructureCheck check_order_preserving(const MatchingPlan& plan, const Scenario& scenario) {
  require_mode(scenario, TemporalMode::HomogeneousSensitivity, "order preservation check");
  StructureCheck out;
  const int m = scenario.type_count();
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return preferred_time(scenario.temporal_costs[a]) < preferred_time(scenario.temporal_costs[b]);
  });
  const double tol = 1e-9 * (1.0 + scenario.horizon_end() - scenario.horizon_start());
  for (std::size_t i = 0; i < plan.temporal.stations.size(); ++i) {
    const StationSchedule& st = plan.temporal.stations[i];
    for (int x = 0; x < m; ++x)
      for (int y = x + 1; y < m; ++y) {
        const auto& early = st.by_type[order[x]];
        const auto& late = st.by_type[order[y]];
        if (early.empty() || late.empty()) continue;
        double last = -kInf, first = kInf;
        for (const TimeInterval& iv : early) last = std::max(last, iv.t1);
        for (const TimeInterval& iv : late) first = std::min(first, iv.t0);
        if (last > first + tol) {
          std::ostringstream msg;
          msg << "station " << i + 1 << ": type " << order[x] + 1 << " served after type " << order[y] + 1
              << " despite an earlier preferred time";
          out.violations.push_back(msg.str());
        }
      }
  }
  out.ok = out.violations.empty();
  return out;
}

StructureCheck check_monotone_coverage(const MatchingPlan& plan, const Scenario& scenario) {
  require_mode(scenario, TemporalMode::HomogeneousPreference, "monotone coverage check");
  StructureCheck out;
  const SpatialGrid& g = scenario.grid();
  const Eigen::MatrixXi& labels = plan.spatial.labels;
  const int m = static_cast<int>(labels.cols());
  auto served_near = [&](int cell, int type) {
    const int ix = cell % g.nx;
    const int iy = cell / g.nx;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int x = ix + dx;
        const int y = iy + dy;
        if (x < 0 || y < 0 || x >= g.nx || y >= g.ny) continue;
        if (labels(y * g.nx + x, type) != 0) return true;
      }
    return false;
  };
  for (int hi = 0; hi < m; ++hi)
    for (int lo = hi + 1; lo < m; ++lo) {
      int bad = 0;
      for (int c = 0; c < g.cell_count(); ++c)
        if (labels(c, hi) != 0 && labels(c, lo) == 0 && !served_near(c, lo)) ++bad;
      if (bad > 0) {
        std::ostringstream msg;
        msg << "type " << hi + 1 << " served in " << bad << " cells outside the coverage of less sensitive type "
            << lo + 1;
        out.violations.push_back(msg.str());
      }
    }
  out.ok = out.violations.empty();
  return out;
}

}  // namespace stmatch
