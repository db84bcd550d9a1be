#include <stmatch/oracle.hpp>
#include <stmatch/solver.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace stmatch {

DiscreteInstance discretize(const Scenario& scenario, int bins, std::size_t cap) {
  if (bins < 1) throw ValidationError("oracle needs at least one time bin");
  scenario.validate();
  const SpatialGrid& g = scenario.grid();
  const int n = scenario.station_count();
  DiscreteInstance out;
  for (int j = 0; j < scenario.type_count(); ++j)
    for (int c = 0; c < g.cell_count(); ++c) {
      const double mass = scenario.demand.cell_mass(c, j);
      if (mass > 0.0) out.atoms.push_back({c, j, mass});
    }
  const std::size_t count = out.atoms.size() * static_cast<std::size_t>(n) * static_cast<std::size_t>(bins);
  if (count > cap)
    throw SizeLimitError("oracle instance has " + std::to_string(count) + " variables, cap is " +
                         std::to_string(cap));
  for (int i = 0; i < n; ++i) {
    const CapacityProfile& profile = scenario.stations[i].capacity;
    const double t0 = profile.start();
    const double dt = (profile.end() - t0) / bins;
    for (int b = 0; b < bins; ++b) {
      const double a = t0 + b * dt;
      const double e = b + 1 == bins ? profile.end() : a + dt;
      out.bins.push_back({i, a, e, profile.integral(a, e)});
    }
  }
  for (int a = 0; a < static_cast<int>(out.atoms.size()); ++a) {
    const DemandAtom& atom = out.atoms[a];
    const Vec2 x = g.cell_center(atom.cell);
    for (int b = 0; b < static_cast<int>(out.bins.size()); ++b) {
      const TimeBin& bin = out.bins[b];
      const double l = temporal_cost(scenario.temporal_costs[atom.type], 0.5 * (bin.t0 + bin.t1));
      const double v = scenario.reward - spatial_cost(scenario.spatial_cost, x, scenario.stations[bin.station].position) - l;
      out.variables.push_back({a, b, std::isfinite(v) ? v : -kInf});
    }
  }
  return out;
}

namespace {

/// Dense tableau simplex for max c'x, Ax <= b, x >= 0 with b >= 0 and a slack starting basis.
class Tableau {
 public:
  Tableau(const Matrix& A, const Vector& b, const Vector& c) : rows_(A.rows()), cols_(A.cols()) {
    t_.setZero(rows_ + 1, cols_ + rows_ + 1);
    t_.block(0, 0, rows_, cols_) = A;
    t_.block(0, cols_, rows_, rows_).setIdentity();
    t_.col(cols_ + rows_).head(rows_) = b;
    t_.row(rows_).head(cols_) = c.transpose();
    basis_.resize(rows_);
    for (Eigen::Index r = 0; r < rows_; ++r) basis_[r] = cols_ + r;
    const double cmax = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
    opt_tol_ = 1e-11 * std::max(1.0, cmax);
  }

  int solve() {
    const Eigen::Index total = cols_ + rows_;
    const long limit = 50 * static_cast<long>(total + rows_) + 1000;
    bool bland = false;
    int stalled = 0;
    double last = objective();
    int pivots = 0;
    for (;;) {
      Eigen::Index enter = -1;
      double best = opt_tol_;
      for (Eigen::Index j = 0; j < total; ++j) {
        const double d = t_(rows_, j);
        if (d > best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return pivots;
      Eigen::Index leave = -1;
      double ratio = kInf;
      for (Eigen::Index r = 0; r < rows_; ++r) {
        const double a = t_(r, enter);
        if (a > 1e-12) {
          const double q = t_(r, total) / a;
          if (q < ratio - 1e-15 || (q <= ratio + 1e-15 && leave >= 0 && basis_[r] < basis_[leave])) {
            ratio = q;
            leave = r;
          }
        }
      }
      if (leave < 0) throw NumericalError("oracle LP reported unbounded; instance is malformed");
      pivot(leave, enter);
      if (++pivots > limit) throw NumericalError("oracle simplex exceeded its pivot limit");
      const double now = objective();
      if (now > last + 1e-14 * (1.0 + std::abs(last))) {
        stalled = 0;
        last = now;
      } else if (++stalled > 50) {
        bland = true;
      }
    }
  }

  double objective() const { return -t_(rows_, cols_ + rows_); }
  Vector primal() const {
    Vector x = Vector::Zero(cols_);
    for (Eigen::Index r = 0; r < rows_; ++r)
      if (basis_[r] < cols_) x[basis_[r]] = std::max(0.0, t_(r, cols_ + rows_));
    return x;
  }
  Vector dual() const {
    Vector y(rows_);
    for (Eigen::Index r = 0; r < rows_; ++r) y[r] = std::max(0.0, -t_(rows_, cols_ + r));
    return y;
  }

 private:
  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index k = 0; k <= rows_; ++k) {
      if (k == r) continue;
      const double f = t_(k, c);
      if (f != 0.0) t_.row(k) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  Eigen::Index rows_;
  Eigen::Index cols_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> t_;
  std::vector<Eigen::Index> basis_;
  double opt_tol_;
};

}  // namespace

LpSolution solve_lp(const DiscreteInstance& instance, std::size_t cap) {
  if (instance.variables.size() > cap)
    throw SizeLimitError("oracle instance has " + std::to_string(instance.variables.size()) +
                         " variables, cap is " + std::to_string(cap));
  const int na = static_cast<int>(instance.atoms.size());
  const int nb = static_cast<int>(instance.bins.size());
  std::vector<int> used;
  for (int k = 0; k < static_cast<int>(instance.variables.size()); ++k)
    if (instance.variables[k].value > 0.0) used.push_back(k);

  LpSolution out;
  out.flows.setZero(static_cast<Eigen::Index>(instance.variables.size()));
  out.atom_duals.setZero(na);
  out.bin_duals.setZero(nb);
  if (!used.empty()) {
    Matrix A = Matrix::Zero(na + nb, static_cast<Eigen::Index>(used.size()));
    Vector b(na + nb), c(static_cast<Eigen::Index>(used.size()));
    for (int a = 0; a < na; ++a) b[a] = instance.atoms[a].mass;
    for (int k = 0; k < nb; ++k) b[na + k] = instance.bins[k].capacity;
    for (std::size_t u = 0; u < used.size(); ++u) {
      const OracleVariable& v = instance.variables[used[u]];
      A(v.atom, static_cast<Eigen::Index>(u)) = 1.0;
      A(na + v.bin, static_cast<Eigen::Index>(u)) = 1.0;
      c[static_cast<Eigen::Index>(u)] = v.value;
    }
    Tableau tab(A, b, c);
    out.pivots = tab.solve();
    const Vector x = tab.primal();
    const Vector y = tab.dual();
    for (std::size_t u = 0; u < used.size(); ++u) out.flows[used[u]] = x[static_cast<Eigen::Index>(u)];
    out.atom_duals = y.head(na);
    out.bin_duals = y.tail(nb);
  }
  for (std::size_t k = 0; k < instance.variables.size(); ++k)
    if (out.flows[static_cast<Eigen::Index>(k)] > 0.0)
      out.value += instance.variables[k].value * out.flows[static_cast<Eigen::Index>(k)];
  // Raise atom duals until every constraint of the dual holds, so the bound is valid.
  for (const OracleVariable& v : instance.variables) {
    const double slack = v.value - out.atom_duals[v.atom] - out.bin_duals[v.bin];
    if (slack > 0.0) out.atom_duals[v.atom] += slack;
  }
  for (int a = 0; a < na; ++a) out.dual_value += instance.atoms[a].mass * out.atom_duals[a];
  for (int k = 0; k < nb; ++k) out.dual_value += instance.bins[k].capacity * out.bin_duals[k];
  out.certificate_gap = (out.dual_value - out.value) / std::max(1.0, std::abs(out.value));
  return out;
}

std::vector<ParityRow> oracle_parity(const std::function<Scenario(int level)>& make_scenario,
                                     const std::vector<OracleLevel>& levels, std::size_t cap) {
  std::vector<ParityRow> rows;
  for (const OracleLevel& level : levels) {
    const Scenario scenario = make_scenario(level.level);
    const DiscreteInstance instance = discretize(scenario, level.bins, cap);
    const LpSolution lp = solve_lp(instance, cap);
    ParityRow row;
    row.level = level.level;
    row.variables = instance.variables.size();
    row.lp_value = lp.value;
    row.certificate_gap = lp.certificate_gap;
    if (scenario.total_demand() > 0.0) row.solver_welfare = solve_stbd(scenario).report.final_objective;
    row.gap = std::abs(row.lp_value - row.solver_welfare) / std::max(1.0, std::abs(row.lp_value));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace stmatch
