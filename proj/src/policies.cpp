#include <stmatch/cells.hpp>
#include <stmatch/optimize.hpp>
#include <stmatch/policies.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace stmatch {

namespace {

double max_cell_cost(const SpatialModel& spatial) {
  double out = 0.0;
  for (int c = 0; c < spatial.cell_count(); ++c)
    for (int i = 0; i < spatial.station_count(); ++i) out = std::max(out, spatial.cost(c, i));
  return out;
}

SpatialAssignment per_type_masses(const Scenario& scenario, const SpatialModel& spatial, const Vector& w,
                                  double threshold, double factor) {
  const int n = scenario.station_count();
  const int m = scenario.type_count();
  SpatialAssignment out;
  out.mass.resize(n, m);
  out.cost.resize(n, m);
  Vector masses, costs;
  for (int j = 0; j < m; ++j) {
    spatial.masses_and_costs(factor * scenario.demand.densities().col(j), w, threshold, masses, costs);
    out.mass.col(j) = masses;
    out.cost.col(j) = costs;
  }
  out.served_fraction = factor;
  out.scaled = factor < 1.0;
  return out;
}

}  // namespace

SpatialAssignment assign_capacity_rule(const Scenario& scenario, const SolveOptions& options) {
  const int n = scenario.station_count();
  const SpatialModel spatial(scenario);
  const Vector merged = scenario.demand.densities().rowwise().sum();
  Vector cap(n);
  for (int i = 0; i < n; ++i) cap[i] = scenario.stations[i].capacity.total();
  const double demand = scenario.total_demand();
  const double factor = demand > 0.0 ? std::min(1.0, cap.sum() / demand) : 1.0;
  const Vector density = factor * merged;
  const double threshold = max_cell_cost(spatial) + 1.0;
  const double mscale = std::max(demand + cap.sum(), 1e-300);

  ObjectiveFn fn = [&](const Vector& w, Vector& g) {
    Vector masses;
    const double v = cap.dot(w) + spatial.value(density, w, threshold, &masses);
    g = cap - masses;
    return v;
  };
  StopFn stop = [&](const Vector& w, double, const Vector& g) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, w[i] > 0.0 ? std::abs(g[i]) : std::max(0.0, -g[i]));
    return worst / mscale <= std::min(options.tol, 1e-9);
  };
  LbfgsOptions lo;
  lo.memory = options.memory;
  lo.max_iterations = options.max_iterations;
  const LbfgsResult r = minimize_lbfgs(fn, Vector::Zero(n), lo, stop, {}, Vector::Zero(n));
  return per_type_masses(scenario, spatial, r.x, threshold, factor);
}

SpatialAssignment assign_distance_rule(const Scenario& scenario) {
  const SpatialModel spatial(scenario);
  return per_type_masses(scenario, spatial, Vector::Zero(scenario.station_count()), kInf, 1.0);
}

std::vector<int> urgency_order(const Scenario& scenario) {
  const int m = scenario.type_count();
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  auto urgency = [&](int j) {
    const auto* tp = std::get_if<TwoPieceLinear>(&scenario.temporal_costs[j]);
    return tp ? tp->sensitivity : 0.0;
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return urgency(a) > urgency(b); });
  return order;
}

double capacity_weighted_cost(const TemporalCostSpec& cost, const CapacityProfile& capacity, double a, double b) {
  if (!(b > a)) return 0.0;
  double covered = 0.0;
  double sum = 0.0;
  for (const AffinePiece& p : affine_pieces(cost, a, b)) {
    const auto& bp = capacity.breakpoints();
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
      const double lo = std::max(p.t0, bp[k]);
      const double hi = std::min(p.t1, bp[k + 1]);
      if (!(hi > lo)) continue;
      const double rate = capacity.rates()[k];
      covered += rate * (hi - lo);
      sum += rate * 0.5 * (p.at(lo) + p.at(hi)) * (hi - lo);
    }
  }
  const double total = capacity.integral(a, b);
  if (covered < total * (1.0 - 1e-12)) return kInf;
  return sum;
}

ScheduleOutcome schedule_random(const SpatialAssignment& assignment, const Scenario& scenario) {
  const int n = scenario.station_count();
  const int m = scenario.type_count();
  ScheduleOutcome out;
  out.served.setZero(n, m);
  out.temporal_cost.setZero(n, m);
  for (int i = 0; i < n; ++i) {
    const CapacityProfile& cap = scenario.stations[i].capacity;
    const double total_cap = cap.total();
    const double load = assignment.mass.row(i).sum();
    const double keep = load > total_cap ? total_cap / load : 1.0;
    for (int j = 0; j < m; ++j) {
      const double q = assignment.mass(i, j) * keep;
      out.served(i, j) = q;
      if (q > 0.0)
        out.temporal_cost(i, j) =
            q * capacity_weighted_cost(scenario.temporal_costs[j], cap, cap.start(), cap.end()) / total_cap;
    }
  }
  return out;
}

ScheduleOutcome schedule_priority(const SpatialAssignment& assignment, const Scenario& scenario) {
  const int n = scenario.station_count();
  const int m = scenario.type_count();
  const std::vector<int> order = urgency_order(scenario);
  ScheduleOutcome out;
  out.served.setZero(n, m);
  out.temporal_cost.setZero(n, m);
  out.bands.assign(n, std::vector<std::vector<TimeInterval>>(m));
  for (int i = 0; i < n; ++i) {
    const CapacityProfile& cap = scenario.stations[i].capacity;
    double remaining = cap.total();
    double used = 0.0;
    for (int j : order) {
      const double q = std::min(assignment.mass(i, j), remaining);
      if (!(q > 0.0)) continue;
      remaining -= q;
      const double a = cap.time_at_cumulative(used);
      used += q;
      const double b = cap.time_at_cumulative(used);
      out.served(i, j) = q;
      out.temporal_cost(i, j) = capacity_weighted_cost(scenario.temporal_costs[j], cap, a, b);
      out.bands[i][j].push_back({a, b});
    }
  }
  return out;
}

PolicyOutcome evaluate_policy(const std::string& name, const SpatialAssignment& assignment,
                              const ScheduleOutcome& schedule, const Scenario& scenario) {
  const int n = scenario.station_count();
  const int m = scenario.type_count();
  PolicyOutcome out;
  out.policy = name;
  double spatial = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (assignment.mass(i, j) > 0.0) spatial += assignment.cost(i, j) * schedule.served(i, j) / assignment.mass(i, j);
  const double temporal = schedule.temporal_cost.sum();
  out.served = schedule.served.sum();
  const double demand = scenario.total_demand();
  out.uncovered_by_type.setZero(m);
  for (int j = 0; j < m; ++j)
    out.uncovered_by_type[j] =
        demand > 0.0 ? std::max(0.0, scenario.demand.total_mass(j) - schedule.served.col(j).sum()) / demand : 0.0;
  out.uncovered_total = out.uncovered_by_type.sum();
  if (out.served > 0.0) {
    out.spatial = spatial / out.served;
    out.temporal = temporal / out.served;
  }
  out.total = out.spatial + out.temporal;
  return out;
}

PolicyOutcome evaluate_plan(const std::string& name, const MatchingPlan& plan, const Scenario& scenario) {
  const int m = scenario.type_count();
  PolicyOutcome out;
  out.policy = name;
  out.served = plan.q.sum();
  const double demand = scenario.total_demand();
  out.uncovered_by_type.setZero(m);
  for (int j = 0; j < m; ++j) out.uncovered_by_type[j] = demand > 0.0 ? plan.uncovered[j] / demand : 0.0;
  out.uncovered_total = out.uncovered_by_type.sum();
  if (out.served > 0.0) {
    out.spatial = plan.welfare.spatial_cost / out.served;
    out.temporal = plan.welfare.temporal_cost / out.served;
  }
  out.total = out.spatial + out.temporal;
  return out;
}

PolicyComparison compare_policies(const Scenario& scenario, const std::vector<std::string>& selected,
                                  const SolveOptions& options) {
  const std::vector<std::string>& names = selected.empty() ? policy_names() : selected;
  for (const std::string& name : names)
    if (std::find(policy_names().begin(), policy_names().end(), name) == policy_names().end())
      throw ValidationError("unknown policy: " + name);
  auto wanted = [&](const std::string& name) { return std::find(names.begin(), names.end(), name) != names.end(); };

  PolicyComparison out;
  out.tolerance = 1e-6 * cost_scale(scenario);
  if (wanted("Spatiotemporal")) {
    const SolveResult solved = solve_stbd(scenario, options);
    out.rows.push_back(evaluate_plan("Spatiotemporal", extract_plan(scenario, solved.eta, options.tol), scenario));
  }
  for (const char* rule : {"Capacity", "Distance"}) {
    const std::string p = std::string(rule) + "_Priority";
    const std::string q = std::string(rule) + "_Random";
    if (!wanted(p) && !wanted(q)) continue;
    const SpatialAssignment assignment =
        std::string(rule) == "Capacity" ? assign_capacity_rule(scenario, options) : assign_distance_rule(scenario);
    if (wanted(p)) out.rows.push_back(evaluate_policy(p, assignment, schedule_priority(assignment, scenario), scenario));
    if (wanted(q)) out.rows.push_back(evaluate_policy(q, assignment, schedule_random(assignment, scenario), scenario));
  }
  if (!out.rows.empty() && out.rows.front().policy == "Spatiotemporal") {
    const PolicyOutcome& best = out.rows.front();
    for (std::size_t k = 1; k < out.rows.size(); ++k)
      if (best.total > out.rows[k].total + out.tolerance) {
        std::ostringstream msg;
        msg << "Spatiotemporal total " << best.total << " exceeds " << out.rows[k].policy << " total "
            << out.rows[k].total;
        out.violations.push_back(msg.str());
      }
  }
  out.dominance_ok = out.violations.empty();
  return out;
}

}  // namespace stmatch
