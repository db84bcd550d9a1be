#include <stmatch/optimize.hpp>
#include <stmatch/solver.hpp>

#include <algorithm>
#include <cmath>

namespace stmatch {

StbdProblem::StbdProblem(const Scenario& scenario)
    : scenario_(scenario),
      temporal_(scenario),
      spatial_(scenario),
      cost_scale_(stmatch::cost_scale(scenario)),
      mass_scale_(stmatch::mass_scale(scenario)) {
  for (int j = 0; j < scenario.type_count(); ++j) densities_.push_back(scenario.demand.densities().col(j));
}

ObjectiveValue StbdProblem::exact(const WeightMatrix& eta) const {
  const int n = scenario_.station_count();
  const int m = scenario_.type_count();
  ObjectiveValue out;
  out.temporal_mass.setZero(n, m);
  out.spatial_mass.setZero(n, m);
  Vector row, col_mass;
  for (int i = 0; i < n; ++i) {
    row = eta.row(i).transpose();
    Vector mass;
    out.temporal += temporal_.value(i, row, &mass);
    out.temporal_mass.row(i) = mass.transpose();
  }
  for (int j = 0; j < m; ++j) {
    out.spatial += spatial_.value(densities_[j], eta.col(j), scenario_.reward, &col_mass);
    out.spatial_mass.col(j) = col_mass;
  }
  out.value = out.temporal + out.spatial;
  out.gradient = out.temporal_mass - out.spatial_mass;
  return out;
}

ObjectiveValue StbdProblem::smoothed(const WeightMatrix& eta, double eps) const {
  const int n = scenario_.station_count();
  const int m = scenario_.type_count();
  ObjectiveValue out;
  out.temporal_mass.setZero(n, m);
  out.spatial_mass.setZero(n, m);
  Vector row, col_mass;
  for (int i = 0; i < n; ++i) {
    row = eta.row(i).transpose();
    Vector mass;
    out.temporal += temporal_.smoothed(i, row, eps, &mass);
    out.temporal_mass.row(i) = mass.transpose();
  }
  for (int j = 0; j < m; ++j) {
    out.spatial += spatial_.smoothed(densities_[j], eta.col(j), scenario_.reward, eps, &col_mass);
    out.spatial_mass.col(j) = col_mass;
  }
  out.value = out.temporal + out.spatial;
  out.gradient = out.temporal_mass - out.spatial_mass;
  return out;
}

double StbdProblem::relative_residual(const Matrix& gradient) const {
  if (gradient.size() == 0) return 0.0;
  return gradient.lpNorm<Eigen::Infinity>() / mass_scale_;
}

ObjectiveValue stbd_objective(const Scenario& scenario, const WeightMatrix& eta) {
  return StbdProblem(scenario).exact(eta);
}

ObjectiveValue stbd_smoothed(const Scenario& scenario, const WeightMatrix& eta, double eps) {
  return StbdProblem(scenario).smoothed(eta, eps);
}

Matrix mass_balance(const Scenario& scenario, const WeightMatrix& eta) {
  return StbdProblem(scenario).exact(eta).gradient;
}

SolveResult solve_stbd(const Scenario& scenario, const SolveOptions& options) {
  StbdProblem problem(scenario);
  return solve_stbd(problem, options);
}

SolveResult solve_stbd(const StbdProblem& problem, const SolveOptions& options) {
  const int n = problem.scenario().station_count();
  const int m = problem.scenario().type_count();
  SolveResult result;
  SolveReport& report = result.report;
  report.cost_scale = problem.cost_scale();
  report.mass_scale = problem.mass_scale();

  auto to_matrix = [&](const Vector& x) { return Eigen::Map<const Matrix>(x.data(), n, m); };
  Vector x = Vector::Zero(static_cast<Eigen::Index>(n) * m);
  int budget = options.max_iterations;
  auto record = [&](const Vector&, double, const Vector& g) {
    report.gradient_norm_history.push_back(g.norm());
  };

  if (options.smoothing) {
    const double scale = problem.cost_scale();
    for (double eps = options.eps_start * scale; eps >= options.eps_end * scale * (1.0 - 1e-12);
         eps *= options.eps_decay) {
      if (budget <= 0) break;
      report.smoothing_schedule.push_back(eps);
      ObjectiveFn fn = [&](const Vector& v, Vector& g) {
        ObjectiveValue ov = problem.smoothed(to_matrix(v), eps);
        g = Eigen::Map<const Vector>(ov.gradient.data(), ov.gradient.size());
        return ov.value;
      };
      StopFn stop = [&](const Vector&, double, const Vector& g) {
        return g.lpNorm<Eigen::Infinity>() / problem.mass_scale() <= options.stage_tol;
      };
      LbfgsOptions lo;
      lo.memory = options.memory;
      lo.max_iterations = std::min(budget, options.stage_iterations);
      LbfgsResult r = minimize_lbfgs(fn, x, lo, stop, record);
      budget -= r.iterations;
      x = r.x;
    }
  }

  ObjectiveFn exact_fn = [&](const Vector& v, Vector& g) {
    ObjectiveValue ov = problem.exact(to_matrix(v));
    g = Eigen::Map<const Vector>(ov.gradient.data(), ov.gradient.size());
    return ov.value;
  };
  StopFn exact_stop = [&](const Vector&, double, const Vector& g) {
    return g.lpNorm<Eigen::Infinity>() / problem.mass_scale() <= options.tol;
  };
  LbfgsOptions lo;
  lo.memory = options.memory;
  bool converged = false;
  std::string message;
  for (int restart = 0; restart < 4 && !converged; ++restart) {
    lo.max_iterations = std::max(budget, 0);
    LbfgsResult r = minimize_lbfgs(exact_fn, x, lo, exact_stop, record);
    budget -= r.iterations;
    x = r.x;
    converged = r.converged;
    message = r.message;
    if (budget <= 0 || r.iterations == 0) break;
  }

  result.eta = to_matrix(x);
  ObjectiveValue final_value = problem.exact(result.eta);
  report.final_objective = final_value.value;
  report.mass_balance_residual = problem.relative_residual(final_value.gradient);
  report.iterations = options.max_iterations - std::max(budget, 0);
  report.converged = report.mass_balance_residual <= options.tol;
  report.message = report.converged ? "converged" : message;
  return result;
}

}  // namespace stmatch
