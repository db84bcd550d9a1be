#include <stmatch/linear.hpp>
#include <stmatch/optimize.hpp>

#include <cmath>

namespace stmatch {

namespace {

void check_sensitivities(const Vector& s) {
  if (s.size() == 0) throw ValidationError("sensitivity list is empty");
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (!(s[k] > 0.0) || !std::isfinite(s[k])) throw ValidationError("sensitivities must be positive");
    if (k > 0 && !(s[k] < s[k - 1])) throw ValidationError("degenerate sensitivities: consecutive values not strictly decreasing");
  }
}

double s_at(const Vector& s, Eigen::Index k) { return k < s.size() ? s[k] : 0.0; }

}  // namespace

double harmonic_beta(const SlopePair& sl) {
  if (sl.early_infinite && sl.late_infinite) throw ValidationError("both slopes infinite");
  if (sl.early_infinite) return 2.0 * sl.late;
  if (sl.late_infinite) return 2.0 * sl.early;
  if (!(sl.early + sl.late > 0.0)) throw ValidationError("early and late slopes are both zero");
  return 2.0 * sl.early * sl.late / (sl.early + sl.late);
}

SensitivityMatrix build_A_inverse(const Vector& s, const SlopePair& slopes) {
  check_sensitivities(s);
  const Eigen::Index m = s.size();
  SensitivityMatrix out;
  out.s = s;
  out.beta = harmonic_beta(slopes);
  out.A.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out.A(i, j) = s[std::max(i, j)];
  out.A_inverse.setZero(m, m);
  out.A_inverse(0, 0) = 1.0 / (s[0] - s_at(s, 1));
  for (Eigen::Index i = 1; i < m; ++i)
    out.A_inverse(i, i) = (s[i - 1] - s_at(s, i + 1)) / ((s[i - 1] - s[i]) * (s[i] - s_at(s, i + 1)));
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    out.A_inverse(i, i + 1) = -1.0 / (s[i] - s[i + 1]);
    out.A_inverse(i + 1, i) = out.A_inverse(i, i + 1);
  }
  return out;
}

Vector apply_A_inverse(const Vector& s, const Vector& v) {
  const Eigen::Index m = s.size();
  Vector out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double diag;
    if (i == 0) diag = 1.0 / (s[0] - s_at(s, 1));
    else diag = (s[i - 1] - s_at(s, i + 1)) / ((s[i - 1] - s[i]) * (s[i] - s_at(s, i + 1)));
    double acc = diag * v[i];
    if (i > 0) acc -= v[i - 1] / (s[i - 1] - s[i]);
    if (i + 1 < m) acc -= v[i + 1] / (s[i] - s[i + 1]);
    out[i] = acc;
  }
  return out;
}

LinearModel check_linear_assumptions(const Scenario& scenario) {
  if (scenario.mode != TemporalMode::HomogeneousPreference)
    throw AssumptionError("linear model requires homogeneous_preference mode");
  scenario.validate();
  const auto& ref = std::get<TwoPieceLinear>(scenario.temporal_costs.front());
  LinearModel model;
  model.s.resize(scenario.type_count());
  for (int j = 0; j < scenario.type_count(); ++j)
    model.s[j] = std::get<TwoPieceLinear>(scenario.temporal_costs[j]).sensitivity;
  model.slopes = {ref.early_slope, ref.late_slope, ref.early_forbidden, ref.late_forbidden};
  if ((!ref.early_forbidden && !(ref.early_slope > 0.0)) || (!ref.late_forbidden && !(ref.late_slope > 0.0)))
    throw AssumptionError("linear model requires positive finite slopes");
  model.beta = harmonic_beta(model.slopes);
  model.preferred_time = ref.preferred_time;
  model.rates.resize(scenario.station_count());
  const double total = scenario.total_demand();
  const double before = ref.preferred_time - scenario.horizon_start();
  const double after = scenario.horizon_end() - ref.preferred_time;
  for (int i = 0; i < scenario.station_count(); ++i) {
    const CapacityProfile& cap = scenario.stations[i].capacity;
    if (!cap.is_constant()) throw AssumptionError("linear model requires constant capacities");
    const double c = cap.rates().front();
    model.rates[i] = c;
    const ClosedFormSchedule worst =
        closed_form_schedule(Vector::Constant(1, total), Vector::Constant(1, 1.0), model.slopes, c);
    const double slack = 1e-12 * (1.0 + before + after);
    if (worst.t_plus[0] > after + slack || -worst.t_minus[0] > before + slack)
      throw AssumptionError("horizon too short: station " + std::to_string(i + 1) +
                            " cannot serve the total demand around the preferred time");
  }
  return model;
}

ObjectiveValue linear_objective(const Scenario& scenario, const WeightMatrix& eta) {
  const LinearModel model = check_linear_assumptions(scenario);
  const SpatialModel spatial(scenario);
  const int n = scenario.station_count();
  const int m = scenario.type_count();
  ObjectiveValue out;
  out.temporal_mass.resize(n, m);
  out.spatial_mass.resize(n, m);
  for (int i = 0; i < n; ++i) {
    const Vector row = eta.row(i).transpose();
    const Vector ainv = apply_A_inverse(model.s, row);
    out.temporal += model.rates[i] / model.beta * row.dot(ainv);
    out.temporal_mass.row(i) = (2.0 * model.rates[i] / model.beta * ainv).transpose();
  }
  Vector masses;
  for (int j = 0; j < m; ++j) {
    out.spatial += spatial.value(scenario.demand.densities().col(j), eta.col(j), scenario.reward, &masses);
    out.spatial_mass.col(j) = masses;
  }
  out.value = out.temporal + out.spatial;
  out.gradient = out.temporal_mass - out.spatial_mass;
  return out;
}

ClosedFormSchedule closed_form_schedule(const Vector& q, const Vector& s, const SlopePair& slopes,
                                        double rate) {
  const Eigen::Index m = q.size();
  const double beta = harmonic_beta(slopes);
  ClosedFormSchedule out;
  out.t_plus.setZero(m);
  out.t_minus.setZero(m);
  double cumulative = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    cumulative += q[j];
    if (slopes.early_infinite) {
      out.t_plus[j] = cumulative / rate;
    } else if (slopes.late_infinite) {
      out.t_minus[j] = -cumulative / rate;
    } else {
      const double sum = slopes.early + slopes.late;
      out.t_plus[j] = slopes.early * cumulative / (rate * sum);
      out.t_minus[j] = -slopes.late * cumulative / (rate * sum);
    }
    out.cost += beta * cumulative * cumulative * (s[j] - s_at(s, j + 1)) / (4.0 * rate);
  }
  return out;
}

LinearSolveResult solve_linear(const Scenario& scenario, const SolveOptions& options) {
  const LinearModel model = check_linear_assumptions(scenario);
  const SpatialModel spatial(scenario);
  const int n = scenario.station_count();
  const int m = scenario.type_count();
  const double mscale = mass_scale(scenario);
  std::vector<Vector> densities;
  for (int j = 0; j < m; ++j) densities.push_back(scenario.demand.densities().col(j));

  auto evaluate = [&](const WeightMatrix& eta, Matrix& grad) {
    double value = 0.0;
    grad.resize(n, m);
    for (int i = 0; i < n; ++i) {
      const Vector row = eta.row(i).transpose();
      const Vector ainv = apply_A_inverse(model.s, row);
      value += model.rates[i] / model.beta * row.dot(ainv);
      grad.row(i) = (2.0 * model.rates[i] / model.beta * ainv).transpose();
    }
    Vector masses;
    for (int j = 0; j < m; ++j) {
      value += spatial.value(densities[j], eta.col(j), scenario.reward, &masses);
      grad.col(j) -= masses;
    }
    return value;
  };

  LinearSolveResult result;
  SolveReport& report = result.report;
  report.cost_scale = cost_scale(scenario);
  report.mass_scale = mscale;
  ObjectiveFn fn = [&](const Vector& x, Vector& g) {
    Matrix grad;
    const double v = evaluate(Eigen::Map<const Matrix>(x.data(), n, m), grad);
    g = Eigen::Map<const Vector>(grad.data(), grad.size());
    return v;
  };
  StopFn stop = [&](const Vector&, double, const Vector& g) {
    return g.lpNorm<Eigen::Infinity>() / mscale <= options.tol;
  };
  LbfgsOptions lo;
  lo.memory = options.memory;
  lo.max_iterations = options.max_iterations;
  LbfgsResult r = minimize_lbfgs(fn, Vector::Zero(static_cast<Eigen::Index>(n) * m), lo, stop,
                                 [&](const Vector&, double, const Vector& g) {
                                   report.gradient_norm_history.push_back(g.norm());
                                 });
  result.eta = Eigen::Map<const Matrix>(r.x.data(), n, m);
  Matrix grad;
  report.final_objective = evaluate(result.eta, grad);
  report.mass_balance_residual = grad.lpNorm<Eigen::Infinity>() / mscale;
  report.iterations = r.iterations;
  report.converged = report.mass_balance_residual <= options.tol;
  report.message = report.converged ? "converged" : r.message;

  MatchingPlan& plan = result.plan;
  plan.spatial.labels.resize(spatial.cell_count(), m);
  plan.q.setZero(n, m);
  Vector masses, costs;
  for (int j = 0; j < m; ++j) {
    const Vector w = result.eta.col(j);
    for (int c = 0; c < spatial.cell_count(); ++c)
      plan.spatial.labels(c, j) = spatial.midpoint_label(c, w, scenario.reward);
    spatial.masses_and_costs(densities[j], w, scenario.reward, masses, costs);
    plan.q.col(j) = masses;
    plan.welfare.spatial_cost += costs.sum();
  }
  plan.spatial.masses = plan.q;
  plan.welfare.reward_total = scenario.reward * plan.q.sum();
  plan.q_temporal = grad + plan.q;

  const double tau = model.preferred_time;
  const double t0 = scenario.horizon_start();
  const double t1 = scenario.horizon_end();
  for (int i = 0; i < n; ++i) {
    const Vector qi = plan.q.row(i).transpose();
    const ClosedFormSchedule cf = closed_form_schedule(qi, model.s, model.slopes, model.rates[i]);
    plan.welfare.temporal_cost += cf.cost;
    StationSchedule st;
    st.by_type.resize(m);
    double prev_plus = 0.0, prev_minus = 0.0;
    for (int j = 0; j < m; ++j) {
      if (cf.t_minus[j] < prev_minus) st.by_type[j].push_back({tau + cf.t_minus[j], tau + prev_minus});
      if (cf.t_plus[j] > prev_plus) st.by_type[j].push_back({tau + prev_plus, tau + cf.t_plus[j]});
      prev_plus = cf.t_plus[j];
      prev_minus = cf.t_minus[j];
    }
    if (tau + prev_minus > t0) st.idle.push_back({t0, tau + prev_minus});
    if (tau + prev_plus < t1) st.idle.push_back({tau + prev_plus, t1});
    plan.temporal.stations.push_back(std::move(st));
  }
  plan.served = plan.q.colwise().sum().transpose();
  plan.uncovered.resize(m);
  for (int j = 0; j < m; ++j)
    plan.uncovered[j] = std::max(0.0, scenario.demand.total_mass(j) - plan.served[j]);
  plan.consistency_residual = report.mass_balance_residual;
  return result;
}

}  // namespace stmatch
