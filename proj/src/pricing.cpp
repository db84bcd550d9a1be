#include <stmatch/envelope.hpp>
#include <stmatch/parallel.hpp>
#include <stmatch/pricing.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace stmatch {

double PricingSchedule::price(int station, double t) const {
  const auto& segs = stations[station];
  double out = 0.0;
  for (const PriceSegment& s : segs) {
    if (t < s.t0) break;
    if (t <= s.t1) out = s.at(t);
  }
  return out;
}

PricingSchedule envy_free_prices(const Scenario& scenario, const WeightMatrix& eta) {
  const TemporalModel model(scenario);
  PricingSchedule out;
  for (int i = 0; i < scenario.station_count(); ++i) {
    std::vector<PriceSegment> segs;
    for (const EnvelopeSegment& e : model.envelope(i, eta.row(i).transpose())) {
      PriceSegment p{e.t0, e.t1, 0.0, 0.0};
      if (e.winner >= 0) {
        p.p0 = std::max(0.0, e.value(e.t0));
        p.p1 = std::max(0.0, e.value(e.t1));
      }
      segs.push_back(p);
    }
    out.stations.push_back(std::move(segs));
  }
  return out;
}

std::optional<int> davenport_schinzel_length(int s, int m) {
  if (m <= 0) return 0;
  if (s <= 0) return 1;
  if (s == 1) return m;
  if (s == 2) return 2 * m - 1;
  return std::nullopt;
}

SlotSchedule slot_mechanism(const Scenario& scenario, const WeightMatrix& eta) {
  const TemporalModel model(scenario);
  SlotSchedule out;
  const bool two_piece = std::all_of(scenario.temporal_costs.begin(), scenario.temporal_costs.end(),
                                     [](const TemporalCostSpec& c) { return std::holds_alternative<TwoPieceLinear>(c); });
  out.crossing_bound = (scenario.mode != TemporalMode::General) ? 2 : (two_piece ? 3 : -1);
  if (out.crossing_bound > 0) out.slot_bound = davenport_schinzel_length(out.crossing_bound, scenario.type_count());
  for (int i = 0; i < scenario.station_count(); ++i) {
    std::vector<Slot> slots;
    double value_integral = 0.0;
    for (const EnvelopeSegment& e : model.envelope(i, eta.row(i).transpose())) {
      if (e.winner < 0) continue;
      if (e.tied) {
        std::ostringstream msg;
        msg << "station " << i + 1 << ": argmax tie over [" << e.t0 << ", " << e.t1 << "]";
        throw DegenerateTieError(msg.str());
      }
      if (!slots.empty() && slots.back().type == e.winner &&
          std::abs(slots.back().t1 - e.t0) <= 1e-12 * (1.0 + std::abs(e.t0))) {
        slots.back().t1 = e.t1;
      } else {
        if (!slots.empty()) slots.back().price = value_integral / slots.back().capacity_mass;
        slots.push_back({e.t0, e.t1, e.winner, 0.0, 0.0});
        value_integral = 0.0;
      }
      slots.back().capacity_mass += e.capacity_mass();
      value_integral += e.value_integral();
    }
    if (!slots.empty()) slots.back().price = value_integral / slots.back().capacity_mass;
    out.stations.push_back(std::move(slots));
  }
  return out;
}

namespace {

/// min over t in the horizon of l(t) + p(t); the minimum of a piecewise-linear function
/// is attained at a breakpoint or as a one-sided limit there.
double best_total_cost(const TemporalCostSpec& cost, const std::vector<PriceSegment>& segs, double t0,
                       double t1, const PricingSchedule& prices, int station) {
  double best = kInf;
  for (const PriceSegment& s : segs) {
    for (int side = 0; side < 2; ++side) {
      const double t = side == 0 ? s.t0 : s.t1;
      const double p = side == 0 ? s.p0 : s.p1;
      const double l = temporal_cost(cost, t);
      if (std::isfinite(l)) best = std::min(best, l + p);
    }
  }
  for (const AffinePiece& piece : affine_pieces(cost, t0, t1))
    for (double t : {piece.t0, piece.t1}) best = std::min(best, piece.at(t) + prices.price(station, t));
  return best;
}

}  // namespace

EnvyReport verify_envy_free(const Scenario& scenario, const WeightMatrix& eta, const MatchingPlan& plan,
                            const PricingSchedule& prices, int agents, std::uint64_t seed) {
  const SpatialGrid& g = scenario.grid();
  const int n = scenario.station_count();
  const int m = scenario.type_count();
  const Matrix& dens = scenario.demand.densities();
  std::vector<double> cdf;
  std::vector<std::pair<int, int>> atoms;
  double acc = 0.0;
  for (int j = 0; j < m; ++j)
    for (int c = 0; c < g.cell_count(); ++c)
      if (dens(c, j) > 0.0) {
        acc += dens(c, j);
        cdf.push_back(acc);
        atoms.emplace_back(c, j);
      }
  EnvyReport report;
  if (atoms.empty() || agents <= 0) return report;

  const double t0 = scenario.horizon_start();
  const double t1 = scenario.horizon_end();
  const double r = scenario.reward;
  const int chunks = chunk_count(agents);
  std::vector<EnvyReport> parts(chunks);
  parallel_for(chunks, [&](int chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    EnvyReport& out = parts[chunk];
    const int lo = static_cast<int>(static_cast<long>(agents) * chunk / chunks);
    const int hi = static_cast<int>(static_cast<long>(agents) * (chunk + 1) / chunks);
    for (int k = lo; k < hi; ++k) {
      const double u = unif(rng) * acc;
      const std::size_t a = std::min<std::size_t>(
          static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()), atoms.size() - 1);
      const auto [cell, type] = atoms[a];
      const Vec2 center = g.cell_center(cell);
      const Vec2 x(center.x() + (unif(rng) - 0.5) * g.dx(), center.y() + (unif(rng) - 0.5) * g.dy());

      int label = -1;
      double best = kInf;
      std::vector<double> delta(n);
      for (int i = 0; i < n; ++i) {
        delta[i] = spatial_cost(scenario.spatial_cost, x, scenario.stations[i].position);
        if (delta[i] + eta(i, type) < best) {
          best = delta[i] + eta(i, type);
          label = i;
        }
      }
      const bool served = best <= r;
      double assigned = 0.0;
      if (served) {
        const auto& intervals = plan.temporal.stations[label].by_type[type];
        const CapacityProfile& cap = scenario.stations[label].capacity;
        double total = 0.0;
        for (const TimeInterval& iv : intervals) total += cap.integral(iv.t0, iv.t1);
        if (!(total > 0.0)) continue;
        double pick = unif(rng) * total;
        double t = intervals.back().t1;
        for (const TimeInterval& iv : intervals) {
          const double mass = cap.integral(iv.t0, iv.t1);
          if (pick <= mass) {
            t = std::clamp(cap.time_at_cumulative(cap.integral(cap.start(), iv.t0) + pick), iv.t0, iv.t1);
            break;
          }
          pick -= mass;
        }
        assigned = r - delta[label] - temporal_cost(scenario.temporal_costs[type], t) - prices.price(label, t);
        out.min_ir = std::min(out.min_ir, assigned);
        ++out.served_agents;
      }
      double alternative = -kInf;
      for (int i = 0; i < n; ++i) {
        const double cost = best_total_cost(scenario.temporal_costs[type], prices.stations[i], t0, t1, prices, i);
        alternative = std::max(alternative, r - delta[i] - cost);
      }
      out.max_envy = std::max(out.max_envy, alternative - assigned);
      ++out.agents;
    }
  });
  for (const EnvyReport& p : parts) {
    report.max_envy = std::max(report.max_envy, p.max_envy);
    report.min_ir = std::min(report.min_ir, p.min_ir);
    report.agents += p.agents;
    report.served_agents += p.served_agents;
  }
  return report;
}

PricingSchedule perturb_prices(const PricingSchedule& prices, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, amplitude);
  PricingSchedule out = prices;
  for (auto& segs : out.stations)
    for (PriceSegment& s : segs) {
      s.p0 += unif(rng);
      s.p1 += unif(rng);
    }
  return out;
}

}  // namespace stmatch
