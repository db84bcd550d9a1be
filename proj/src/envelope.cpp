#include <stmatch/envelope.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace stmatch {

namespace {

constexpr std::array<double, 4> kGaussNodes = {-0.8611363115940526, -0.3399810435848563,
                                               0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights = {0.3478548451374538, 0.6521451548625461,
                                                 0.6521451548625461, 0.3478548451374538};
constexpr int kMaxPanels = 4096;

std::vector<ElementaryInterval> build_intervals(const CapacityProfile& profile,
                                                const std::vector<TemporalCostSpec>& costs) {
  const double t0 = profile.start();
  const double t1 = profile.end();
  std::vector<std::vector<AffinePiece>> pieces;
  std::vector<double> cuts = profile.breakpoints();
  for (const auto& spec : costs) {
    pieces.push_back(affine_pieces(spec, t0, t1));
    for (const AffinePiece& p : pieces.back()) {
      cuts.push_back(p.t0);
      cuts.push_back(p.t1);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const int m = static_cast<int>(costs.size());
  std::vector<ElementaryInterval> out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    ElementaryInterval iv;
    iv.t0 = a;
    iv.t1 = b;
    iv.rate = profile.rate_at(mid);
    iv.present.assign(m, 0);
    iv.cost_slope.assign(m, 0.0);
    iv.cost_offset.assign(m, 0.0);
    for (int j = 0; j < m; ++j)
      for (const AffinePiece& p : pieces[j])
        if (p.t0 <= mid && mid <= p.t1) {
          iv.present[j] = 1;
          iv.cost_slope[j] = p.slope;
          iv.cost_offset[j] = p.intercept;
          break;
        }
    out.push_back(std::move(iv));
  }
  return out;
}

}  // namespace

double plus_max(const double* a, int count) {
  double best = 0.0;
  for (int k = 0; k < count; ++k) best = std::max(best, a[k]);
  return best;
}

double smooth_plus_max(const double* a, int count, double eps, double* weights) {
  const double top = plus_max(a, count);
  double sum = std::exp(-top / eps);
  for (int k = 0; k < count; ++k) {
    const double e = std::exp((a[k] - top) / eps);
    if (weights) weights[k] = e;
    sum += e;
  }
  if (weights)
    for (int k = 0; k < count; ++k) weights[k] /= sum;
  return top + eps * std::log(sum);
}

TemporalModel::TemporalModel(const std::vector<CapacityProfile>& profiles,
                             const std::vector<TemporalCostSpec>& costs)
    : types_(static_cast<int>(costs.size())) {
  for (const CapacityProfile& p : profiles) intervals_.push_back(build_intervals(p, costs));
}

TemporalModel::TemporalModel(const Scenario& scenario) : types_(scenario.type_count()) {
  for (const Station& s : scenario.stations)
    intervals_.push_back(build_intervals(s.capacity, scenario.temporal_costs));
}

StationEnvelope TemporalModel::envelope(int station, const Vector& eta_row) const {
  StationEnvelope out;
  std::vector<int> ids;
  std::vector<double> p, q, cuts;
  for (const ElementaryInterval& iv : intervals_[station]) {
    ids.clear();
    p.clear();
    q.clear();
    for (int j = 0; j < types_; ++j)
      if (iv.present[j]) {
        ids.push_back(j);
        p.push_back(eta_row[j] - iv.cost_offset[j]);
        q.push_back(-iv.cost_slope[j]);
      }
    const int k = static_cast<int>(ids.size());
    cuts.assign({iv.t0, iv.t1});
    auto add_cut = [&](double t) {
      if (t > iv.t0 && t < iv.t1) cuts.push_back(t);
    };
    for (int u = 0; u < k; ++u) {
      if (q[u] != 0.0) add_cut(-p[u] / q[u]);
      for (int v = u + 1; v < k; ++v)
        if (q[u] != q[v]) add_cut((p[v] - p[u]) / (q[u] - q[v]));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const std::size_t first = out.size();
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a = cuts[c];
      const double b = cuts[c + 1];
      if (!(b > a)) continue;
      const double mid = 0.5 * (a + b);
      int best = -1;
      double best_val = -kInf;
      for (int u = 0; u < k; ++u) {
        const double val = p[u] + q[u] * mid;
        if (val > best_val) {
          best_val = val;
          best = u;
        }
      }
      EnvelopeSegment seg;
      seg.t0 = a;
      seg.t1 = b;
      seg.rate = iv.rate;
      if (best >= 0 && best_val >= 0.0) {
        seg.winner = ids[best];
        seg.slope = q[best];
        seg.intercept = p[best];
        const double tol = 1e-12 * (1.0 + std::abs(best_val));
        for (int u = 0; u < k; ++u)
          if (u != best && std::abs(p[u] + q[u] * mid - best_val) <= tol &&
              std::abs(q[u] - q[best]) <= 1e-12 * (1.0 + std::abs(q[best])))
            seg.tied = true;
      }
      if (out.size() > first && out.back().winner == seg.winner && out.back().t1 == seg.t0 &&
          out.back().slope == seg.slope && out.back().intercept == seg.intercept) {
        out.back().t1 = seg.t1;
        out.back().tied = out.back().tied || seg.tied;
      } else {
        out.push_back(seg);
      }
    }
  }
  return out;
}

double TemporalModel::value(int station, const Vector& eta_row, Vector* gradient) const {
  if (gradient) gradient->setZero(types_);
  double total = 0.0;
  for (const EnvelopeSegment& seg : envelope(station, eta_row)) {
    if (seg.winner < 0) continue;
    total += seg.value_integral();
    if (gradient) (*gradient)[seg.winner] += seg.capacity_mass();
  }
  return total;
}

double TemporalModel::smoothed(int station, const Vector& eta_row, double eps,
                               Vector* gradient) const {
  if (gradient) gradient->setZero(types_);
  double total = 0.0;
  std::vector<int> ids;
  std::vector<double> a, w;
  for (const ElementaryInterval& iv : intervals_[station]) {
    ids.clear();
    double steep = 0.0;
    for (int j = 0; j < types_; ++j)
      if (iv.present[j]) {
        ids.push_back(j);
        steep = std::max(steep, std::abs(iv.cost_slope[j]));
      }
    const int k = static_cast<int>(ids.size());
    if (k == 0) continue;
    a.resize(k);
    w.resize(k);
    const double len = iv.t1 - iv.t0;
    const double want = std::ceil(len * steep / eps);
    const int panels = static_cast<int>(std::clamp(want, 1.0, static_cast<double>(kMaxPanels)));
    const double h = len / panels;
    for (int pnl = 0; pnl < panels; ++pnl) {
      const double center = iv.t0 + (pnl + 0.5) * h;
      for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
        const double t = center + 0.5 * h * kGaussNodes[g];
        const double weight = 0.5 * h * kGaussWeights[g] * iv.rate;
        for (int u = 0; u < k; ++u) {
          const int j = ids[u];
          a[u] = eta_row[j] - iv.cost_offset[j] - iv.cost_slope[j] * t;
        }
        total += weight * smooth_plus_max(a.data(), k, eps, gradient ? w.data() : nullptr);
        if (gradient)
          for (int u = 0; u < k; ++u) (*gradient)[ids[u]] += weight * w[u];
      }
    }
  }
  return total;
}

}  // namespace stmatch
