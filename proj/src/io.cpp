#include <stmatch/io.hpp>

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace stmatch {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < length; ++k) {
    out.push_back(hex[digest[k] >> 4]);
    out.push_back(hex[digest[k] & 15]);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Json json_number(double value) {
  if (std::isfinite(value)) return value;
  return format_double(value);
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(json_number(v[k]));
  return out;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Vector(m.row(r).transpose())));
  return out;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("expected a nonempty array of rows");
  const std::size_t cols = j.front().size();
  Matrix out(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ParseError("ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ParseError("matrix entries must be numbers");
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return out;
}

Json to_json(const SolveReport& report) {
  Json out;
  out["final_objective"] = json_number(report.final_objective);
  out["mass_balance_residual"] = json_number(report.mass_balance_residual);
  out["iterations"] = report.iterations;
  out["converged"] = report.converged;
  out["message"] = report.message;
  out["cost_scale"] = json_number(report.cost_scale);
  out["mass_scale"] = json_number(report.mass_scale);
  Json hist = Json::array();
  for (double g : report.gradient_norm_history) hist.push_back(json_number(g));
  out["gradient_norm_history"] = hist;
  Json sched = Json::array();
  for (double e : report.smoothing_schedule) sched.push_back(json_number(e));
  out["smoothing_schedule"] = sched;
  return out;
}

namespace {

Json intervals_json(const std::vector<TimeInterval>& list) {
  Json out = Json::array();
  for (const TimeInterval& iv : list) out.push_back({json_number(iv.t0), json_number(iv.t1)});
  return out;
}

}  // namespace

Json to_json(const MatchingPlan& plan, const Scenario& scenario) {
  Json out;
  out["q"] = to_json(plan.q);
  out["q_temporal"] = to_json(plan.q_temporal);
  out["served"] = to_json(plan.served);
  out["uncovered"] = to_json(plan.uncovered);
  out["consistency_residual"] = json_number(plan.consistency_residual);
  out["welfare"] = {{"reward_total", json_number(plan.welfare.reward_total)},
                    {"spatial_cost", json_number(plan.welfare.spatial_cost)},
                    {"temporal_cost", json_number(plan.welfare.temporal_cost)},
                    {"welfare", json_number(plan.welfare.welfare())}};
  Json stations = Json::array();
  for (std::size_t i = 0; i < plan.temporal.stations.size(); ++i) {
    const StationSchedule& st = plan.temporal.stations[i];
    Json by_type = Json::array();
    for (const auto& list : st.by_type) by_type.push_back(intervals_json(list));
    stations.push_back({{"station", i + 1},
                        {"name", scenario.stations[i].name},
                        {"by_type", by_type},
                        {"idle", intervals_json(st.idle)}});
  }
  out["schedule"] = stations;
  Json labels = Json::array();
  for (Eigen::Index c = 0; c < plan.spatial.labels.rows(); ++c) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < plan.spatial.labels.cols(); ++j) row.push_back(plan.spatial.labels(c, j));
    labels.push_back(row);
  }
  out["labels"] = labels;
  return out;
}

Json to_json(const PricingSchedule& prices) {
  Json out = Json::array();
  for (std::size_t i = 0; i < prices.stations.size(); ++i) {
    Json segs = Json::array();
    for (const PriceSegment& s : prices.stations[i])
      segs.push_back({{"t0", json_number(s.t0)}, {"t1", json_number(s.t1)}, {"p0", json_number(s.p0)},
                      {"p1", json_number(s.p1)}});
    out.push_back({{"station", i + 1}, {"segments", segs}});
  }
  return out;
}

Json to_json(const SlotSchedule& slots) {
  Json out;
  out["crossing_bound"] = slots.crossing_bound;
  out["slot_bound"] = slots.slot_bound ? Json(*slots.slot_bound) : Json(nullptr);
  Json stations = Json::array();
  for (std::size_t i = 0; i < slots.stations.size(); ++i) {
    Json list = Json::array();
    for (const Slot& s : slots.stations[i])
      list.push_back({{"t0", json_number(s.t0)},
                      {"t1", json_number(s.t1)},
                      {"type", s.type + 1},
                      {"price", json_number(s.price)},
                      {"capacity_mass", json_number(s.capacity_mass)}});
    stations.push_back({{"station", i + 1}, {"slots", list}});
  }
  out["stations"] = stations;
  return out;
}

Json to_json(const AllocationResult& result) {
  Json out;
  out["scales"] = to_json(result.scales);
  out["eta"] = to_json(result.eta);
  out["objective"] = json_number(result.objective);
  out["welfare"] = json_number(result.welfare);
  out["normalized_load"] = to_json(result.normalized_load);
  Json binding = Json::array();
  for (int i : result.binding) binding.push_back(i + 1);
  out["binding"] = binding;
  out["degenerate"] = result.degenerate;
  out["report"] = to_json(result.report);
  return out;
}

Json to_json(const PolicyComparison& comparison) {
  Json rows = Json::array();
  for (const PolicyOutcome& r : comparison.rows)
    rows.push_back({{"policy", r.policy},
                    {"spatial", json_number(r.spatial)},
                    {"temporal", json_number(r.temporal)},
                    {"total", json_number(r.total)},
                    {"uncovered_total", json_number(r.uncovered_total)},
                    {"uncovered_by_type", to_json(r.uncovered_by_type)}});
  Json out;
  out["rows"] = rows;
  out["dominance_ok"] = comparison.dominance_ok;
  out["violations"] = comparison.violations;
  out["tolerance"] = json_number(comparison.tolerance);
  return out;
}

Json to_json(const std::vector<ParityRow>& rows) {
  Json out = Json::array();
  for (const ParityRow& r : rows)
    out.push_back({{"level", r.level},
                   {"variables", r.variables},
                   {"lp_value", json_number(r.lp_value)},
                   {"solver_welfare", json_number(r.solver_welfare)},
                   {"gap", json_number(r.gap)},
                   {"certificate_gap", json_number(r.certificate_gap)}});
  return out;
}

std::string plan_cells_csv(const MatchingPlan& plan, const Scenario& scenario) {
  const SpatialGrid& g = scenario.grid();
  std::ostringstream out;
  out << "cell,ix,iy,x,y,type,label\n";
  for (int j = 0; j < plan.spatial.labels.cols(); ++j)
    for (int c = 0; c < g.cell_count(); ++c) {
      const Vec2 x = g.cell_center(c);
      out << c << ',' << c % g.nx << ',' << c / g.nx << ',' << format_double(x.x()) << ','
          << format_double(x.y()) << ',' << j + 1 << ',' << plan.spatial.labels(c, j) << '\n';
    }
  return out.str();
}

std::string schedule_csv(const MatchingPlan& plan) {
  std::ostringstream out;
  out << "station,type,t0,t1\n";
  for (std::size_t i = 0; i < plan.temporal.stations.size(); ++i) {
    const StationSchedule& st = plan.temporal.stations[i];
    for (std::size_t j = 0; j < st.by_type.size(); ++j)
      for (const TimeInterval& iv : st.by_type[j])
        out << i + 1 << ',' << j + 1 << ',' << format_double(iv.t0) << ',' << format_double(iv.t1) << '\n';
    for (const TimeInterval& iv : st.idle)
      out << i + 1 << ",0," << format_double(iv.t0) << ',' << format_double(iv.t1) << '\n';
  }
  return out.str();
}

std::string prices_csv(const PricingSchedule& prices) {
  std::ostringstream out;
  out << "station,t,price\n";
  for (std::size_t i = 0; i < prices.stations.size(); ++i) {
    const auto& segs = prices.stations[i];
    for (std::size_t k = 0; k < segs.size(); ++k) {
      if (k == 0) out << i + 1 << ',' << format_double(segs[k].t0) << ',' << format_double(segs[k].p0) << '\n';
      out << i + 1 << ',' << format_double(segs[k].t1) << ',' << format_double(segs[k].p1) << '\n';
    }
  }
  return out.str();
}

std::string slots_csv(const SlotSchedule& slots) {
  std::ostringstream out;
  out << "station,slot,t0,t1,type,price,capacity_mass\n";
  for (std::size_t i = 0; i < slots.stations.size(); ++i)
    for (std::size_t k = 0; k < slots.stations[i].size(); ++k) {
      const Slot& s = slots.stations[i][k];
      out << i + 1 << ',' << k + 1 << ',' << format_double(s.t0) << ',' << format_double(s.t1) << ','
          << s.type + 1 << ',' << format_double(s.price) << ',' << format_double(s.capacity_mass) << '\n';
    }
  return out.str();
}

std::string comparison_csv(const PolicyComparison& comparison) {
  std::ostringstream out;
  out << "policy,spatial,temporal,total,uncovered_total,uncovered_by_type\n";
  for (const PolicyOutcome& r : comparison.rows) {
    out << r.policy << ',' << format_double(r.spatial) << ',' << format_double(r.temporal) << ','
        << format_double(r.total) << ',' << format_double(r.uncovered_total) << ',';
    for (Eigen::Index j = 0; j < r.uncovered_by_type.size(); ++j)
      out << (j ? ";" : "") << format_double(r.uncovered_by_type[j]);
    out << '\n';
  }
  return out.str();
}

}  // namespace stmatch
