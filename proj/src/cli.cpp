#include <stmatch/allocation.hpp>
#include <stmatch/analytic.hpp>
#include <stmatch/cli.hpp>
#include <stmatch/config.hpp>
#include <stmatch/io.hpp>
#include <stmatch/linear.hpp>
#include <stmatch/oracle.hpp>
#include <stmatch/policies.hpp>
#include <stmatch/pricing.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace stmatch {

namespace {

struct CommonOptions {
  std::string config;
  bool linear = false;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string format = "csv";
  std::optional<int> max_iterations;
};

/// Collects artifacts of one command and writes the manifest last.
class Output {
 public:
  Output(std::string command, const CommonOptions& opts) : command_(std::move(command)), opts_(opts) {}

  void write(const std::string& name, const std::string& content) {
    write_file_atomic((std::filesystem::path(opts_.out) / name).string(), content);
    artifacts_.push_back({{"file", name}, {"sha256", sha256_hex(content)}});
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  void finish(const std::string& config_checksum, double tol) {
    Json manifest;
    manifest["command"] = command_;
    manifest["config"] = opts_.config;
    manifest["config_sha256"] = config_checksum;
    manifest["seed"] = opts_.seed;
    manifest["tol"] = json_number(tol);
    manifest["format"] = opts_.format;
    manifest["out"] = opts_.out;
    manifest["artifacts"] = artifacts_;
    write_file_atomic((std::filesystem::path(opts_.out) / "manifest.json").string(), manifest.dump(2) + "\n");
  }

 private:
  std::string command_;
  const CommonOptions& opts_;
  Json artifacts_ = Json::array();
};

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "Scenario file (.json or .toml)");
  if (config_required) c->required();
  cmd->add_flag("--linear", o.linear, "Use the closed-form linear model when its assumptions hold");
  cmd->add_option("--tol", o.tol, "Relative mass-balance tolerance");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--max-iterations", o.max_iterations, "Solver iteration budget");
}

LoadedConfig load(const CommonOptions& o, bool generate) {
  if (!o.config.empty()) return load_config(o.config);
  if (!generate) throw ParseError("--config is required");
  Json doc;
  doc["generator"] = {{"seed", o.seed}};
  return config_from_json(doc);
}

SolveOptions solve_options(const LoadedConfig& cfg, const CommonOptions& o) {
  SolveOptions s = cfg.solve;
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw ValidationError("--tol must be positive");
    s.tol = *o.tol;
  }
  if (o.max_iterations) {
    if (*o.max_iterations < 0) throw ValidationError("--max-iterations must be nonnegative");
    s.max_iterations = *o.max_iterations;
  }
  return s;
}

struct Solved {
  WeightMatrix eta;
  SolveReport report;
  MatchingPlan plan;
  bool linear = false;
};

Solved solve(const Scenario& scenario, const SolveOptions& options, bool linear) {
  Solved out;
  if (linear) {
    try {
      LinearSolveResult r = solve_linear(scenario, options);
      out.eta = std::move(r.eta);
      out.report = std::move(r.report);
      out.plan = std::move(r.plan);
      out.linear = true;
      return out;
    } catch (const AssumptionError& e) {
      std::cerr << "note: linear model not applicable (" << e.what() << "); using the general solver\n";
    }
  }
  SolveResult r = solve_stbd(scenario, options);
  out.eta = std::move(r.eta);
  out.report = std::move(r.report);
  out.plan = extract_plan(scenario, out.eta, out.report.converged ? options.tol : kInf);
  return out;
}

/// Weights from a solution sidecar, rejected when it was produced for another config.
WeightMatrix load_eta(const std::string& path, const LoadedConfig& cfg) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("config_sha256") || !j.contains("eta")) throw ParseError(path + ": not a solution file");
  if (j["config_sha256"] != cfg.checksum)
    throw ValidationError(path + ": checksum mismatch, weights were computed for a different config");
  WeightMatrix eta = matrix_from_json(j["eta"]);
  if (eta.rows() != cfg.scenario.station_count() || eta.cols() != cfg.scenario.type_count())
    throw ValidationError(path + ": weight matrix has the wrong shape");
  return eta;
}

Json solution_json(const Solved& s, const LoadedConfig& cfg) {
  return {{"config_sha256", cfg.checksum}, {"eta", to_json(s.eta)}, {"report", to_json(s.report)},
          {"linear", s.linear}};
}

int cmd_solve(const CommonOptions& o, bool generate) {
  const LoadedConfig cfg = load(o, generate);
  const SolveOptions so = solve_options(cfg, o);
  const Solved s = solve(cfg.scenario, so, o.linear);
  Output out("solve", o);
  out.write_json("solution.json", solution_json(s, cfg));
  if (o.format == "json") {
    Json plan = to_json(s.plan, cfg.scenario);
    out.write_json("schedule.json", plan["schedule"]);
    plan.erase("schedule");
    out.write_json("plan.json", plan);
  } else {
    out.write("plan.csv", plan_cells_csv(s.plan, cfg.scenario));
    out.write("schedule.csv", schedule_csv(s.plan));
  }
  out.finish(cfg.checksum, so.tol);
  if (!s.report.converged) {
    std::cerr << "solver did not converge: residual " << s.report.mass_balance_residual << " > " << so.tol << " ("
              << s.report.message << ")\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

WeightMatrix weights(const CommonOptions& o, const LoadedConfig& cfg, const std::string& eta_path, bool& converged) {
  converged = true;
  if (!eta_path.empty()) return load_eta(eta_path, cfg);
  const Solved s = solve(cfg.scenario, solve_options(cfg, o), o.linear);
  converged = s.report.converged;
  return s.eta;
}

int cmd_prices(const CommonOptions& o, const std::string& eta_path, int agents) {
  const LoadedConfig cfg = load(o, false);
  bool converged;
  const WeightMatrix eta = weights(o, cfg, eta_path, converged);
  const PricingSchedule prices = envy_free_prices(cfg.scenario, eta);
  Output out("prices", o);
  if (o.format == "json") out.write_json("prices.json", to_json(prices));
  else out.write("prices.csv", prices_csv(prices));
  if (agents > 0) {
    const MatchingPlan plan = extract_plan(cfg.scenario, eta, kInf);
    const EnvyReport r = verify_envy_free(cfg.scenario, eta, plan, prices, agents, o.seed);
    out.write_json("envy.json", {{"max_envy", json_number(r.max_envy)},
                                 {"min_ir", json_number(r.min_ir)},
                                 {"agents", r.agents},
                                 {"served_agents", r.served_agents},
                                 {"cost_scale", json_number(cost_scale(cfg.scenario))}});
  }
  out.finish(cfg.checksum, solve_options(cfg, o).tol);
  return converged ? kExitOk : kExitNotConverged;
}

int cmd_slots(const CommonOptions& o, const std::string& eta_path) {
  const LoadedConfig cfg = load(o, false);
  bool converged;
  const WeightMatrix eta = weights(o, cfg, eta_path, converged);
  const SlotSchedule slots = slot_mechanism(cfg.scenario, eta);
  Output out("slots", o);
  if (o.format == "json") out.write_json("slots.json", to_json(slots));
  else out.write("slots.csv", slots_csv(slots));
  out.finish(cfg.checksum, solve_options(cfg, o).tol);
  return converged ? kExitOk : kExitNotConverged;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ParseError(std::string(what) + ": malformed number '" + item + "'");
    }
  }
  return out;
}

int cmd_allocate(const CommonOptions& o, double budget, const std::string& xi_text) {
  const LoadedConfig cfg = load(o, false);
  const int n = cfg.scenario.station_count();
  Vector xi = Vector::Ones(n);
  if (!xi_text.empty()) {
    const std::vector<double> v = parse_list(xi_text, "--xi");
    if (static_cast<int>(v.size()) != n) throw ValidationError("--xi needs one weight per station");
    xi = Eigen::Map<const Vector>(v.data(), n);
  }
  const SolveOptions so = solve_options(cfg, o);
  const AllocationResult r = solve_capacity_allocation(cfg.scenario, budget, xi, so);
  Output out("allocate", o);
  if (o.format == "json") {
    out.write_json("allocation.json", to_json(r));
  } else {
    std::ostringstream csv;
    csv << "station,scale,normalized_load,binding\n";
    for (int i = 0; i < n; ++i)
      csv << i + 1 << ',' << format_double(r.scales[i]) << ',' << format_double(r.normalized_load[i]) << ','
          << (std::find(r.binding.begin(), r.binding.end(), i) != r.binding.end() ? 1 : 0) << '\n';
    out.write("allocation.csv", csv.str());
  }
  out.finish(cfg.checksum, so.tol);
  if (r.degenerate) std::cerr << "no demand is served; allocation is degenerate\n";
  return r.report.converged ? kExitOk : kExitNotConverged;
}

int cmd_compare(const CommonOptions& o, const std::string& policies, bool generate) {
  const LoadedConfig cfg = load(o, generate);
  std::vector<std::string> selected;
  std::stringstream ss(policies);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) selected.push_back(item);
  const SolveOptions so = solve_options(cfg, o);
  const PolicyComparison cmp = compare_policies(cfg.scenario, selected, so);
  Output out("compare", o);
  if (o.format == "json") out.write_json("comparison.json", to_json(cmp));
  else out.write("comparison.csv", comparison_csv(cmp));
  out.finish(cfg.checksum, so.tol);
  if (!cmp.dominance_ok) {
    for (const std::string& v : cmp.violations) std::cerr << "dominance violated: " << v << '\n';
    return kExitDominance;
  }
  return kExitOk;
}

int cmd_hotelling(const CommonOptions& o, const HotellingParams& p, int points) {
  if (points < 2) throw ValidationError("--points must be at least 2");
  const HomogeneousSolution hom = hotelling_homogeneous(p);
  const UniformSolution uni = hotelling_uniform(p);
  Output out("hotelling", o);
  Json summary = {{"params", {{"c1", p.c1}, {"c2", p.c2}, {"w", p.w}, {"r", p.r}}},
                  {"homogeneous",
                   {{"regime", to_string(hom.regime)},
                    {"x1", json_number(hom.x1)},
                    {"x2", json_number(hom.x2)},
                    {"welfare", json_number(hom.welfare)},
                    {"threshold", json_number(hom.threshold)}}},
                  {"uniform",
                   {{"regime", to_string(uni.regime())},
                    {"critical_reward", json_number(uni.critical_reward())},
                    {"lambda", json_number(uni.lambda())}}}};
  if (uni.regime() == HotellingRegime::Adjacent) {
    summary["uniform"]["alpha_hat"] = json_number(uni.alpha_hat());
    summary["uniform"]["kappa"] = json_number(uni.kappa());
  }
  if (o.format == "json") {
    Json curve = Json::array();
    for (int k = 0; k < points; ++k) {
      const double a = static_cast<double>(k) / (points - 1);
      curve.push_back({{"alpha", json_number(a)}, {"f1", json_number(uni.f1(a))}, {"f2", json_number(uni.f2(a))}});
    }
    summary["boundary"] = curve;
    out.write_json("hotelling.json", summary);
  } else {
    std::ostringstream csv;
    csv << "alpha,f1,f2\n";
    for (int k = 0; k < points; ++k) {
      const double a = static_cast<double>(k) / (points - 1);
      csv << format_double(a) << ',' << format_double(uni.f1(a)) << ',' << format_double(uni.f2(a)) << '\n';
    }
    out.write("boundary.csv", csv.str());
    out.write_json("hotelling.json", summary);
  }
  out.finish("", o.tol.value_or(0.0));
  return kExitOk;
}

int cmd_oracle(const CommonOptions& o, int bins, std::size_t cap) {
  const LoadedConfig cfg = load(o, false);
  const DiscreteInstance instance = discretize(cfg.scenario, bins, cap);
  const LpSolution lp = solve_lp(instance, cap);
  const SolveOptions so = solve_options(cfg, o);
  const SolveResult solved = solve_stbd(cfg.scenario, so);
  const double welfare = cfg.scenario.total_demand() > 0.0 ? solved.report.final_objective : 0.0;
  ParityRow row;
  row.level = 0;
  row.variables = instance.variables.size();
  row.lp_value = lp.value;
  row.solver_welfare = welfare;
  row.gap = std::abs(lp.value - welfare) / std::max(1.0, std::abs(lp.value));
  row.certificate_gap = lp.certificate_gap;
  Output out("oracle", o);
  Json j = to_json(std::vector<ParityRow>{row}).front();
  j["bins"] = bins;
  j["dual_value"] = json_number(lp.dual_value);
  j["pivots"] = lp.pivots;
  if (o.format == "json") {
    out.write_json("oracle.json", j);
  } else {
    std::ostringstream csv;
    csv << "variables,bins,lp_value,dual_value,solver_welfare,gap,certificate_gap\n"
        << row.variables << ',' << bins << ',' << format_double(lp.value) << ',' << format_double(lp.dual_value)
        << ',' << format_double(welfare) << ',' << format_double(row.gap) << ','
        << format_double(row.certificate_gap) << '\n';
    out.write("oracle.csv", csv.str());
  }
  out.finish(cfg.checksum, so.tol);
  return solved.report.converged ? kExitOk : kExitNotConverged;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Capacitated spatiotemporal matching solver", "stmatch"};
  app.require_subcommand(1);
  CommonOptions o;

  auto* solve_cmd = app.add_subcommand("solve", "Solve the dual and write the matching plan");
  add_common(solve_cmd, o, false);
  bool generate = false;
  solve_cmd->add_flag("--generate", generate, "Use the generator section, or the default study shape");

  std::string eta_path;
  int agents = 0;
  auto* prices_cmd = app.add_subcommand("prices", "Envy-free time-dependent prices");
  add_common(prices_cmd, o, true);
  prices_cmd->add_option("--eta", eta_path, "solution.json from a previous solve");
  prices_cmd->add_option("--agents", agents, "Sample this many agents and report envy");

  auto* slots_cmd = app.add_subcommand("slots", "Finite slot schedule with slot prices");
  add_common(slots_cmd, o, true);
  slots_cmd->add_option("--eta", eta_path, "solution.json from a previous solve");

  double budget = 0.0;
  std::string xi_text;
  auto* alloc_cmd = app.add_subcommand("allocate", "Split a capacity budget across stations");
  add_common(alloc_cmd, o, true);
  alloc_cmd->add_option("--budget", budget, "Total capacity budget B")->required();
  alloc_cmd->add_option("--xi", xi_text, "Comma-separated station cost weights (default 1)");

  std::string policies;
  auto* compare_cmd = app.add_subcommand("compare", "Benchmark policy comparison table");
  add_common(compare_cmd, o, false);
  compare_cmd->add_option("--policies", policies, "Comma-separated subset of policies");
  compare_cmd->add_flag("--generate", generate, "Use the default study shape when no config is given");

  HotellingParams hp;
  int points = 101;
  auto* hot_cmd = app.add_subcommand("hotelling", "Closed-form Hotelling boundaries");
  add_common(hot_cmd, o, false);
  hot_cmd->add_option("--c1", hp.c1)->required();
  hot_cmd->add_option("--c2", hp.c2)->required();
  hot_cmd->add_option("--w", hp.w)->required();
  hot_cmd->add_option("--r", hp.r)->required();
  hot_cmd->add_option("--points", points, "Samples of alpha on [0, 1]");

  int bins = 20;
  std::size_t cap = kDefaultOracleCap;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force LP on a discretized instance");
  add_common(oracle_cmd, o, true);
  oracle_cmd->add_option("--bins", bins, "Time bins per station");
  oracle_cmd->add_option("--cap", cap, "Maximum number of LP variables");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*solve_cmd) return cmd_solve(o, generate);
    if (*prices_cmd) return cmd_prices(o, eta_path, agents);
    if (*slots_cmd) return cmd_slots(o, eta_path);
    if (*alloc_cmd) return cmd_allocate(o, budget, xi_text);
    if (*compare_cmd) return cmd_compare(o, policies, generate);
    if (*hot_cmd) return cmd_hotelling(o, hp, points);
    if (*oracle_cmd) return cmd_oracle(o, bins, cap);
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace stmatch
