#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracles {

using namespace stmatch;

double bisect(const std::function<double(double)>& f, double lo, double hi, int iterations) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  if ((flo > 0.0) == (f(hi) > 0.0)) throw std::invalid_argument("bisect: no sign change");
  for (int k = 0; k < iterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

int argmax_at(const std::vector<TemporalCostSpec>& costs, const Vector& eta_row, double t, double* best) {
  int winner = -1;
  *best = 0.0;
  for (std::size_t j = 0; j < costs.size(); ++j) {
    const double v = eta_row[static_cast<Eigen::Index>(j)] - temporal_cost(costs[j], t);
    if (v > *best) {
      *best = v;
      winner = static_cast<int>(j);
    }
  }
  return winner;
}

}  // namespace

double riemann_temporal(const CapacityProfile& capacity, const std::vector<TemporalCostSpec>& costs,
                        const Vector& eta_row, int samples, Vector* masses) {
  if (masses) masses->setZero(static_cast<Eigen::Index>(costs.size()));
  const std::vector<double>& bp = capacity.breakpoints();
  const double span = capacity.end() - capacity.start();
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    const int n = std::max(1, static_cast<int>(std::lround(samples * (bp[p + 1] - bp[p]) / span)));
    const double dt = (bp[p + 1] - bp[p]) / n;
    const double c = capacity.rates()[p];
    for (int k = 0; k < n; ++k) {
      double best = 0.0;
      const int winner = argmax_at(costs, eta_row, bp[p] + (k + 0.5) * dt, &best);
      sum += best * c * dt;
      if (masses && winner >= 0) (*masses)[winner] += c * dt;
    }
  }
  return sum;
}

double subsampled_spatial(const Scenario& scenario, const Vector& density, const Vector& w, double threshold,
                          int sub, Vector* masses) {
  const SpatialGrid& g = scenario.grid();
  const int n = scenario.station_count();
  if (masses) masses->setZero(n);
  const double area = g.cell_area() / (sub * sub);
  double sum = 0.0;
  for (int c = 0; c < g.cell_count(); ++c) {
    if (density[c] == 0.0) continue;
    const Vec2 center = g.cell_center(c);
    for (int a = 0; a < sub; ++a)
      for (int b = 0; b < sub; ++b) {
        const Vec2 x = center + Vec2((a + 0.5) / sub - 0.5, (b + 0.5) / sub - 0.5).cwiseProduct(Vec2(g.dx(), g.dy()));
        double best = 0.0;
        int winner = -1;
        for (int i = 0; i < n; ++i) {
          const double v = threshold - w[i] - spatial_cost(scenario.spatial_cost, x, scenario.stations[i].position);
          if (v > best) {
            best = v;
            winner = i;
          }
        }
        sum += best * density[c] * area;
        if (masses && winner >= 0) (*masses)[winner] += density[c] * area;
      }
  }
  return sum;
}

int argmax_runs(const CapacityProfile& capacity, const std::vector<TemporalCostSpec>& costs, const Vector& eta_row,
                int samples) {
  const double a = capacity.start();
  const double dt = (capacity.end() - a) / samples;
  int runs = 0;
  int previous = -2;
  for (int k = 0; k < samples; ++k) {
    double best = 0.0;
    const int winner = argmax_at(costs, eta_row, a + (k + 0.5) * dt, &best);
    if (winner >= 0 && winner != previous) ++runs;
    previous = winner;
  }
  return runs;
}

Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& x, double h) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      Matrix up = x;
      Matrix down = x;
      up(r, c) += h;
      down(r, c) -= h;
      g(r, c) = (f(up) - f(down)) / (2.0 * h);
    }
  return g;
}

double random_schedule_cost(const Vector& q, const Vector& s, const SlopePair& slopes, double rate,
                            std::mt19937_64& rng, int pieces_per_type) {
  struct Piece {
    int type;
    double mass;
  };
  std::vector<Piece> pieces;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    std::vector<double> cuts{0.0, 1.0};
    for (int k = 1; k < pieces_per_type; ++k) cuts.push_back(unit(rng));
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      pieces.push_back({static_cast<int>(j), q[j] * (cuts[k + 1] - cuts[k])});
  }
  std::shuffle(pieces.begin(), pieces.end(), rng);
  double early = 0.0;
  double late = 0.0;
  double cost = 0.0;
  for (const Piece& p : pieces) {
    const double len = p.mass / rate;
    const bool go_late = slopes.early_infinite || (!slopes.late_infinite && unit(rng) < 0.5);
    double& edge = go_late ? late : early;
    const double slope = go_late ? slopes.late : slopes.early;
    cost += rate * s[p.type] * slope * 0.5 * ((edge + len) * (edge + len) - edge * edge);
    edge += len;
  }
  return cost;
}

Scenario line_scenario(const Vector& densities, const Vector& sensitivities, double c1, double c2, double w,
                       double r, int cells) {
  const SpatialGrid grid{0.0, 1.0, -0.5, 0.5, cells, 1};
  Scenario sc;
  Matrix dens(cells, densities.size());
  for (int c = 0; c < cells; ++c) dens.row(c) = densities.transpose();
  sc.demand = DemandField(grid, dens);
  const double horizon = densities.sum() / std::min(c1, c2) + 1.0;
  for (int i = 0; i < 2; ++i) {
    Station st;
    st.position = Vec2(i == 0 ? 0.0 : 1.0, 0.0);
    st.capacity = CapacityProfile::constant(0.0, horizon, i == 0 ? c1 : c2);
    sc.stations.push_back(st);
  }
  for (Eigen::Index j = 0; j < sensitivities.size(); ++j) {
    TwoPieceLinear cost;
    cost.sensitivity = sensitivities[j];
    cost.late_slope = w;
    cost.early_slope = 0.0;
    cost.early_forbidden = true;
    sc.temporal_costs.push_back(cost);
  }
  sc.reward = r;
  sc.mode = TemporalMode::HomogeneousPreference;
  sc.validate();
  return sc;
}

Scenario random_linear_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int m = 2 + static_cast<int>(seed % 2);
  const int n = 2 + static_cast<int>((seed / 2) % 2);
  const SpatialGrid grid{0.0, 1.0, 0.0, 1.0, 12, 12};
  Matrix dens(grid.cell_count(), m);
  for (int c = 0; c < grid.cell_count(); ++c)
    for (int j = 0; j < m; ++j) dens(c, j) = 0.3 + unit(rng);
  Scenario sc;
  sc.demand = DemandField(grid, dens);
  const double early = 0.5 + 1.5 * unit(rng);
  const double late = 0.5 + 1.5 * unit(rng);
  double sens = 1.0;
  for (int j = 0; j < m; ++j) {
    TwoPieceLinear cost;
    cost.sensitivity = sens;
    cost.early_slope = early;
    cost.late_slope = late;
    sc.temporal_costs.push_back(cost);
    sens *= 0.3 + 0.5 * unit(rng);
  }
  const double horizon = 4.0 * sc.demand.total_mass() / 0.5 + 1.0;
  for (int i = 0; i < n; ++i) {
    Station st;
    st.position = Vec2(0.1 + 0.8 * unit(rng), 0.1 + 0.8 * unit(rng));
    st.capacity = CapacityProfile::constant(-horizon, horizon, 0.5 + 1.5 * unit(rng));
    sc.stations.push_back(st);
  }
  sc.reward = 0.6 + 0.6 * unit(rng);
  sc.mode = TemporalMode::HomogeneousPreference;
  sc.validate();
  return sc;
}

}  // namespace oracles
