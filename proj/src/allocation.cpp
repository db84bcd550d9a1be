#include <stmatch/allocation.hpp>
#include <stmatch/optimize.hpp>

#include <algorithm>
#include <cmath>

namespace stmatch {

namespace {

/// eps * log sum exp(u / eps) with softmax weights.
double log_sum_exp(const Vector& u, double eps, Vector& weights) {
  const double top = u.maxCoeff();
  weights = ((u.array() - top) / eps).exp();
  const double sum = weights.sum();
  weights /= sum;
  return top + eps * std::log(sum);
}

struct CaEvaluation {
  double value = 0.0;
  double spatial = 0.0;
  Matrix gradient;
  Vector load;
  Matrix temporal_mass;
  Matrix spatial_mass;
};

}  // namespace

AllocationResult solve_capacity_allocation(const Scenario& scenario, double budget, const Vector& xi,
                                           const SolveOptions& options) {
  const int n = scenario.station_count();
  const int m = scenario.type_count();
  if (!(budget > 0.0) || !std::isfinite(budget)) throw ValidationError("budget must be positive");
  if (xi.size() != n) throw ValidationError("weights xi must have one entry per station");
  for (int i = 0; i < n; ++i)
    if (!(xi[i] > 0.0) || !std::isfinite(xi[i])) throw ValidationError("weights xi must be positive");
  scenario.validate();

  const StbdProblem problem(scenario);
  const TemporalModel& temporal = problem.temporal();
  const SpatialModel& spatial = problem.spatial();
  std::vector<Vector> densities;
  for (int j = 0; j < m; ++j) densities.push_back(scenario.demand.densities().col(j));
  double zscale = 0.0;
  for (int i = 0; i < n; ++i) zscale = std::max(zscale, scenario.stations[i].capacity.total() / xi[i]);
  const double scale = problem.cost_scale();
  const double mscale = scenario.total_demand() + budget * zscale;

  // smooth_terms: smoothed plus-max terms; the max over stations is always log-sum-exp at max_eps.
  auto evaluate = [&](const WeightMatrix& eta, bool smooth_terms, double eps, double max_eps) {
    CaEvaluation ev;
    ev.temporal_mass.resize(n, m);
    ev.spatial_mass.resize(n, m);
    ev.load.resize(n);
    Vector row, mass;
    for (int i = 0; i < n; ++i) {
      row = eta.row(i).transpose();
      const double z = smooth_terms ? temporal.smoothed(i, row, eps, &mass) : temporal.value(i, row, &mass);
      ev.load[i] = z / xi[i];
      ev.temporal_mass.row(i) = mass.transpose();
    }
    Vector weights;
    ev.value = budget * log_sum_exp(ev.load, max_eps * zscale, weights);
    ev.gradient.resize(n, m);
    for (int i = 0; i < n; ++i) ev.gradient.row(i) = budget * weights[i] / xi[i] * ev.temporal_mass.row(i);
    for (int j = 0; j < m; ++j) {
      ev.spatial += smooth_terms ? spatial.smoothed(densities[j], eta.col(j), scenario.reward, eps, &mass)
                                 : spatial.value(densities[j], eta.col(j), scenario.reward, &mass);
      ev.spatial_mass.col(j) = mass;
    }
    ev.value += ev.spatial;
    ev.gradient -= ev.spatial_mass;
    return ev;
  };

  AllocationResult result;
  SolveReport& report = result.report;
  report.cost_scale = scale;
  report.mass_scale = mscale;
  auto to_matrix = [&](const Vector& x) { return Eigen::Map<const Matrix>(x.data(), n, m); };
  Vector x = Vector::Zero(static_cast<Eigen::Index>(n) * m);
  int budget_iterations = options.max_iterations;
  auto record = [&](const Vector&, double, const Vector& g) { report.gradient_norm_history.push_back(g.norm()); };

  auto run_stage = [&](bool smooth_terms, double eps, double max_eps, double stage_tol) {
    ObjectiveFn fn = [&](const Vector& v, Vector& g) {
      CaEvaluation ev = evaluate(to_matrix(v), smooth_terms, eps, max_eps);
      g = Eigen::Map<const Vector>(ev.gradient.data(), ev.gradient.size());
      return ev.value;
    };
    StopFn stop = [&](const Vector&, double, const Vector& g) {
      return g.lpNorm<Eigen::Infinity>() / mscale <= stage_tol;
    };
    LbfgsOptions lo;
    lo.memory = options.memory;
    lo.max_iterations = std::min(budget_iterations, options.stage_iterations);
    LbfgsResult r = minimize_lbfgs(fn, x, lo, stop, record);
    budget_iterations -= r.iterations;
    x = r.x;
    return r;
  };

  double eps = options.eps_start * scale;
  if (options.smoothing) {
    for (; eps >= options.eps_end * scale * (1.0 - 1e-12) && budget_iterations > 0; eps *= options.eps_decay) {
      report.smoothing_schedule.push_back(eps);
      run_stage(true, eps, eps, options.stage_tol);
    }
  }
  // The max over stations stays smoothed; its temperature keeps shrinking on the exact terms.
  std::string message = "iteration budget exhausted";
  double last_eps = std::min(eps, options.eps_end * scale);
  for (double max_eps = last_eps; max_eps >= 1e-8 * scale && budget_iterations > 0; max_eps *= 0.1) {
    report.smoothing_schedule.push_back(max_eps);
    LbfgsResult r = run_stage(false, 0.0, max_eps, options.tol);
    message = r.message;
    last_eps = max_eps;
  }

  result.eta = to_matrix(x);
  const CaEvaluation final_ev = evaluate(result.eta, false, 0.0, last_eps);
  result.normalized_load = final_ev.load;
  const double top = final_ev.load.maxCoeff();
  result.objective = result.welfare = budget * top + final_ev.spatial;
  report.final_objective = result.objective;
  report.mass_balance_residual = final_ev.gradient.lpNorm<Eigen::Infinity>() / mscale;
  report.iterations = options.max_iterations - std::max(budget_iterations, 0);
  report.converged = report.mass_balance_residual <= options.tol;
  report.message = report.converged ? "converged" : message;

  result.scales.setZero(n);
  const double band = std::max(1e-6 * std::abs(top), 20.0 * last_eps * zscale);
  double served = 0.0;
  for (int i = 0; i < n; ++i) {
    if (final_ev.load[i] < top - band) continue;
    result.binding.push_back(i);
    const double s = final_ev.spatial_mass.row(i).sum();
    const double t = final_ev.temporal_mass.row(i).sum();
    served += s;
    if (t > 0.0) result.scales[i] = s / t;
  }
  const double spent = xi.dot(result.scales);
  if (!(served > 0.0) || !(spent > 0.0)) {
    result.scales.setZero(n);
    result.degenerate = true;
  } else {
    result.scales *= budget / spent;
  }
  return result;
}

Vector optimal_capacity_single_type(const Scenario& scenario, double budget) {
  if (scenario.type_count() != 1) throw AssumptionError("proportional rule requires a single demand type");
  if (!(budget > 0.0)) throw ValidationError("budget must be positive");
  const SpatialModel spatial(scenario);
  Vector masses;
  spatial.value(scenario.demand.densities().col(0), Vector::Zero(scenario.station_count()), kInf, &masses);
  const double total = masses.sum();
  if (!(total > 0.0)) return Vector::Zero(scenario.station_count());
  return budget * masses / total;
}

const char* to_string(Configuration c) {
  return c == Configuration::Dispersion ? "dispersion" : "concentration";
}

DispersionVerdict dispersion_vs_concentration(double c1, double c2, double w, double c0, double reward) {
  if (!(c1 > 0.0) || !(c2 > 0.0) || !(w > 0.0) || !(c0 >= 0.0))
    throw ValidationError("dispersion comparison needs positive c1, c2, w and nonnegative c0");
  DispersionVerdict out;
  const double denom = 2.0 * c1 * c2 + (c1 + c2) * w;
  const double pooled = c1 + c2 + c0;
  out.dispersion_cost = (c2 + w) * (c1 + w) / (2.0 * denom);
  out.concentration_cost = 0.5 + w / (2.0 * pooled);
  const double full_dispersion = (w + c1) * (w + c2) / denom;
  const double full_concentration = (pooled + w) / pooled;
  out.reward = reward > 0.0 ? reward : std::max(full_dispersion, full_concentration);
  out.dispersion_welfare = out.reward - out.dispersion_cost;
  out.concentration_welfare = out.reward - out.concentration_cost;
  if (c1 * c2 >= w * w) {
    out.verdict = Configuration::Dispersion;
    return out;
  }
  out.threshold = c1 * c2 * (c1 + c2 + 2.0 * w) / (w * w - c1 * c2);
  out.verdict = c0 > out.threshold ? Configuration::Concentration : Configuration::Dispersion;
  return out;
}

DispersionBounds dispersion_bounds_general(double eta1, double eta2, double c1, double c2, double D) {
  DispersionBounds out;
  out.dispersion_sufficient = eta2 >= std::max(eta1, (eta2 - eta1) * c1 / (2.0 * (c1 + c2)));
  const double diff = eta1 - eta2;
  out.concentration_sufficient =
      D > 0.0 ? eta2 <= diff * diff * c1 / (2.0 * D * (c1 + c2)) : eta2 <= 0.0;
  return out;
}

double spatial_difference_bound(const Scenario& scenario, int station1, int station2) {
  const SpatialGrid& g = scenario.grid();
  const Vec2 y1 = scenario.stations.at(station1).position;
  const Vec2 y2 = scenario.stations.at(station2).position;
  auto diff = [&](const Vec2& x) {
    return std::abs(spatial_cost(scenario.spatial_cost, x, y1) - spatial_cost(scenario.spatial_cost, x, y2));
  };
  double out = 0.0;
  for (int c = 0; c < g.cell_count(); ++c) out = std::max(out, diff(g.cell_center(c)));
  for (int iy = 0; iy <= g.ny; ++iy)
    for (int ix = 0; ix <= g.nx; ++ix)
      out = std::max(out, diff(Vec2(g.x_min + ix * g.dx(), g.y_min + iy * g.dy())));
  return out;
}

}  // namespace stmatch
