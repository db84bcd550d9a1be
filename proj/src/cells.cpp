#include <stmatch/cells.hpp>
#include <stmatch/envelope.hpp>
#include <stmatch/parallel.hpp>

#include <cmath>

namespace stmatch {

namespace {

void clip(std::vector<Vec2>& poly, double alpha, const Vec2& beta, std::vector<Vec2>& scratch) {
  scratch.clear();
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& p = poly[k];
    const Vec2& q = poly[(k + 1) % n];
    const double fp = alpha + beta.dot(p);
    const double fq = alpha + beta.dot(q);
    if (fp >= 0.0) scratch.push_back(p);
    if ((fp >= 0.0) != (fq >= 0.0)) scratch.push_back(p + (fp / (fp - fq)) * (q - p));
  }
  poly.swap(scratch);
}

void area_and_moment(const std::vector<Vec2>& poly, double& area, Vec2& moment) {
  area = 0.0;
  moment.setZero();
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& p = poly[k];
    const Vec2& q = poly[(k + 1) % n];
    const double cross = p.x() * q.y() - q.x() * p.y();
    area += cross;
    moment += cross * (p + q);
  }
  area *= 0.5;
  moment /= 6.0;
}

struct ChunkResult {
  double value = 0.0;
  Vector masses;
};

}  // namespace

SpatialModel::SpatialModel(const Scenario& scenario)
    : grid_(scenario.grid()),
      cells_(scenario.grid().cell_count()),
      stations_(scenario.station_count()),
      delta_(cells_, stations_),
      grad_x_(cells_, stations_),
      grad_y_(cells_, stations_) {
  for (int c = 0; c < cells_; ++c) {
    const Vec2 x = grid_.cell_center(c);
    for (int i = 0; i < stations_; ++i) {
      const Vec2& y = scenario.stations[i].position;
      delta_(c, i) = spatial_cost(scenario.spatial_cost, x, y);
      const Vec2 g = spatial_cost_gradient(scenario.spatial_cost, x, y);
      grad_x_(c, i) = g.x();
      grad_y_(c, i) = g.y();
    }
  }
}

void SpatialModel::split_cell(int cell, const Vector& w, double threshold,
                              std::vector<CellShare>& shares) const {
  const double hx = 0.5 * grid_.dx();
  const double hy = 0.5 * grid_.dy();
  const bool bounded = std::isfinite(threshold);
  const int n = stations_;
  auto reach = [&](double bx, double by) { return std::abs(bx) * hx + std::abs(by) * hy; };
  auto offset = [&](int i) { return (bounded ? threshold : 0.0) - w[i] - delta_(cell, i); };

  int best = 0;
  double best_a = offset(0);
  double top = best_a + reach(grad_x_(cell, 0), grad_y_(cell, 0));
  for (int i = 1; i < n; ++i) {
    const double a = offset(i);
    top = std::max(top, a + reach(grad_x_(cell, i), grad_y_(cell, i)));
    if (a > best_a) {
      best_a = a;
      best = i;
    }
  }
  if (bounded && top <= 0.0) return;

  bool pure = !bounded || best_a - reach(grad_x_(cell, best), grad_y_(cell, best)) >= 0.0;
  for (int k = 0; pure && k < n; ++k) {
    if (k == best) continue;
    const double margin = (best_a - offset(k)) -
                          reach(grad_x_(cell, best) - grad_x_(cell, k), grad_y_(cell, best) - grad_y_(cell, k));
    if (margin < 0.0) pure = false;
  }
  if (pure) {
    shares.push_back({best, grid_.cell_area(), Vec2::Zero()});
    return;
  }

  std::vector<Vec2> poly, scratch;
  for (int i = 0; i < n; ++i) {
    const double ai = offset(i);
    const Vec2 bi = cost_gradient(cell, i);
    if (bounded && ai + reach(bi.x(), bi.y()) <= 0.0) continue;
    bool dominated = false;
    for (int k = 0; k < n && !dominated; ++k) {
      if (k == i) continue;
      const double da = ai - offset(k);
      const Vec2 db = bi - cost_gradient(cell, k);
      if (da + reach(db.x(), db.y()) < 0.0) dominated = true;
      if (k < i && da == 0.0 && db.x() == 0.0 && db.y() == 0.0) dominated = true;
    }
    if (dominated) continue;
    poly = {Vec2(-hx, -hy), Vec2(hx, -hy), Vec2(hx, hy), Vec2(-hx, hy)};
    if (bounded) clip(poly, ai, -bi, scratch);
    for (int k = 0; k < n && poly.size() >= 3; ++k) {
      if (k == i) continue;
      clip(poly, ai - offset(k), cost_gradient(cell, k) - bi, scratch);
    }
    if (poly.size() < 3) continue;
    double area;
    Vec2 moment;
    area_and_moment(poly, area, moment);
    if (area > 0.0) shares.push_back({i, area, moment});
  }
}

double SpatialModel::value(const Vector& density, const Vector& w, double threshold,
                           Vector* masses) const {
  const int chunks = chunk_count(cells_);
  std::vector<ChunkResult> parts(chunks);
  parallel_for(chunks, [&](int chunk) {
    ChunkResult& out = parts[chunk];
    out.masses.setZero(stations_);
    std::vector<CellShare> shares;
    const int lo = static_cast<int>(static_cast<long>(cells_) * chunk / chunks);
    const int hi = static_cast<int>(static_cast<long>(cells_) * (chunk + 1) / chunks);
    for (int c = lo; c < hi; ++c) {
      const double mu = density[c];
      if (mu == 0.0) continue;
      shares.clear();
      split_cell(c, w, threshold, shares);
      for (const CellShare& s : shares) {
        const double a = threshold - w[s.station] - delta_(c, s.station);
        out.value += mu * (a * s.area - cost_gradient(c, s.station).dot(s.moment));
        out.masses[s.station] += mu * s.area;
      }
    }
  });
  double total = 0.0;
  if (masses) masses->setZero(stations_);
  for (const ChunkResult& p : parts) {
    total += p.value;
    if (masses) *masses += p.masses;
  }
  return total;
}

double SpatialModel::smoothed(const Vector& density, const Vector& w, double threshold, double eps,
                              Vector* masses) const {
  const int chunks = chunk_count(cells_);
  std::vector<ChunkResult> parts(chunks);
  const double area = grid_.cell_area();
  parallel_for(chunks, [&](int chunk) {
    ChunkResult& out = parts[chunk];
    out.masses.setZero(stations_);
    std::vector<double> a(stations_), wt(stations_);
    const int lo = static_cast<int>(static_cast<long>(cells_) * chunk / chunks);
    const int hi = static_cast<int>(static_cast<long>(cells_) * (chunk + 1) / chunks);
    for (int c = lo; c < hi; ++c) {
      const double mu = density[c];
      if (mu == 0.0) continue;
      for (int i = 0; i < stations_; ++i) a[i] = threshold - w[i] - delta_(c, i);
      out.value += mu * area * smooth_plus_max(a.data(), stations_, eps, wt.data());
      for (int i = 0; i < stations_; ++i) out.masses[i] += mu * area * wt[i];
    }
  });
  double total = 0.0;
  if (masses) masses->setZero(stations_);
  for (const ChunkResult& p : parts) {
    total += p.value;
    if (masses) *masses += p.masses;
  }
  return total;
}

int SpatialModel::midpoint_label(int cell, const Vector& w, double threshold) const {
  int best = 0;
  double best_v = delta_(cell, 0) + w[0];
  for (int i = 1; i < stations_; ++i) {
    const double v = delta_(cell, i) + w[i];
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  return best_v <= threshold ? best + 1 : 0;
}

void SpatialModel::masses_and_costs(const Vector& density, const Vector& w, double threshold,
                                    Vector& masses, Vector& costs) const {
  masses.setZero(stations_);
  costs.setZero(stations_);
  std::vector<CellShare> shares;
  for (int c = 0; c < cells_; ++c) {
    const double mu = density[c];
    if (mu == 0.0) continue;
    shares.clear();
    split_cell(c, w, threshold, shares);
    for (const CellShare& s : shares) {
      masses[s.station] += mu * s.area;
      costs[s.station] += mu * (delta_(c, s.station) * s.area + cost_gradient(c, s.station).dot(s.moment));
    }
  }
}

}  // namespace stmatch
