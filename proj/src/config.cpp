#include <stmatch/config.hpp>

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace stmatch {

namespace {

/// A JSON value with its dotted path, for error messages that name the field.
class Field {
 public:
  Field(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const Json& raw() const { return j_; }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  Field at(const std::string& key) const {
    if (!j_.is_object()) fail("expected a table/object");
    if (!j_.contains(key)) throw ParseError(join(key) + ": missing required field");
    return Field(j_.at(key), join(key));
  }
  Field at(std::size_t k) const { return Field(j_.at(k), path_ + "[" + std::to_string(k) + "]"); }
  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (j_.is_number()) return j_.get<double>();
    if (j_.is_string()) {
      std::string s = j_.get<std::string>();
      std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
      if (s == "inf" || s == "+inf" || s == "infinity") return kInf;
      if (s == "-inf" || s == "-infinity") return -kInf;
    }
    fail("expected a number");
  }
  double finite() const {
    const double v = number();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  int integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<int>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t k = 0; k < size(); ++k) out.push_back(at(k).finite());
    return out;
  }
  Vec2 point() const {
    if (size() != 2) fail("expected [x, y]");
    return {at(0).finite(), at(1).finite()};
  }

  double number_or(const std::string& key, double fallback) const { return has(key) ? at(key).number() : fallback; }
  int integer_or(const std::string& key, int fallback) const { return has(key) ? at(key).integer() : fallback; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_ + ": " + what); }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const Json& j_;
  std::string path_;
};

SpatialGrid parse_grid(const Field& f) {
  SpatialGrid g;
  g.x_min = f.at("x_min").finite();
  g.x_max = f.at("x_max").finite();
  g.y_min = f.at("y_min").finite();
  g.y_max = f.at("y_max").finite();
  g.nx = f.at("nx").integer();
  g.ny = f.at("ny").integer();
  try {
    g.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(f.path() + ": " + e.what());
  }
  return g;
}

SpatialCostSpec parse_spatial(const Field& f) {
  SpatialCostSpec s;
  s.exponent = f.number_or("exponent", 1.0);
  s.coefficient = f.number_or("coefficient", 1.0);
  return s;
}

TemporalCostSpec parse_temporal(const Field& f) {
  const std::string kind = f.has("kind") ? f.at("kind").string() : "two_piece";
  if (kind == "two_piece") {
    TwoPieceLinear c;
    c.sensitivity = f.number_or("sensitivity", 1.0);
    c.preferred_time = f.number_or("preferred_time", 0.0);
    const double early = f.number_or("early_slope", 1.0);
    const double late = f.number_or("late_slope", 1.0);
    c.early_forbidden = std::isinf(early) || (f.has("early_forbidden") && f.at("early_forbidden").boolean());
    c.late_forbidden = std::isinf(late) || (f.has("late_forbidden") && f.at("late_forbidden").boolean());
    c.early_slope = std::isinf(early) ? 0.0 : early;
    c.late_slope = std::isinf(late) ? 0.0 : late;
    return c;
  }
  if (kind == "piecewise_linear") {
    PiecewiseLinearCost c;
    c.times = f.at("times").numbers();
    c.values = f.at("values").numbers();
    return c;
  }
  f.at("kind").fail("unknown temporal cost kind '" + kind + "' (two_piece or piecewise_linear)");
}

CapacityProfile parse_capacity(const Field& f, const std::optional<std::pair<double, double>>& horizon) {
  if (f.has("rate")) {
    if (!horizon) throw ParseError(f.path() + ".rate: a constant rate needs the top-level horizon [t0, t1]");
    return CapacityProfile::constant(horizon->first, horizon->second, f.at("rate").finite());
  }
  return CapacityProfile(f.at("breakpoints").numbers(), f.at("rates").numbers());
}

Matrix parse_csv_demand(const std::string& text, const SpatialGrid& g, int types, const std::string& where) {
  Matrix dens = Matrix::Zero(g.cell_count(), types);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "ix,iy,type,density") throw ParseError(where + ": header must be 'ix,iy,type,density'");
      header = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 4) throw ParseError(where + ":" + std::to_string(lineno) + ": expected 4 columns");
    try {
      const int ix = std::stoi(cols[0]);
      const int iy = std::stoi(cols[1]);
      const int type = std::stoi(cols[2]);
      const double value = std::stod(cols[3]);
      if (ix < 0 || ix >= g.nx || iy < 0 || iy >= g.ny || type < 1 || type > types)
        throw ParseError(where + ":" + std::to_string(lineno) + ": index out of range");
      dens(iy * g.nx + ix, type - 1) = value;
    } catch (const std::logic_error&) {
      throw ParseError(where + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  if (!header) throw ParseError(where + ": empty demand file");
  return dens;
}

Matrix parse_demand(const Field& f, const SpatialGrid& g, int types, const std::string& base_dir,
                    Json& canonical) {
  const std::string kind = f.at("kind").string();
  Matrix dens = Matrix::Zero(g.cell_count(), types);
  if (kind == "constant") {
    const Field d = f.at("densities");
    if (d.size() != static_cast<std::size_t>(types))
      d.fail("expected one density per temporal cost (" + std::to_string(types) + ")");
    for (int j = 0; j < types; ++j) dens.col(j).setConstant(d.at(j).finite());
    return dens;
  }
  if (kind == "gaussian_mixture") {
    const Field comps = f.at("components");
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const Field c = comps.at(k);
      const int type = c.at("type").integer();
      if (type < 1 || type > types) c.at("type").fail("type out of range 1.." + std::to_string(types));
      const Vec2 center = c.at("center").point();
      const double sigma = c.at("sigma").finite();
      if (!(sigma > 0.0)) c.at("sigma").fail("must be positive");
      const double weight = c.number_or("weight", 1.0);
      for (int cell = 0; cell < g.cell_count(); ++cell)
        dens(cell, type - 1) +=
            weight * std::exp(-(g.cell_center(cell) - center).squaredNorm() / (2.0 * sigma * sigma));
    }
    if (f.has("type_masses")) {
      const std::vector<double> masses = f.at("type_masses").numbers();
      if (masses.size() != static_cast<std::size_t>(types)) f.at("type_masses").fail("expected one mass per type");
      for (int j = 0; j < types; ++j) {
        const double mass = dens.col(j).sum() * g.cell_area();
        if (mass > 0.0) dens.col(j) *= masses[j] / mass;
      }
    }
    return dens;
  }
  if (kind == "csv") {
    const std::string rel = f.at("path").string();
    const std::filesystem::path p = std::filesystem::path(rel).is_absolute()
                                        ? std::filesystem::path(rel)
                                        : std::filesystem::path(base_dir) / rel;
    const std::string text = read_file(p.string());
    canonical["demand"]["sha256"] = sha256_hex(text);
    return parse_csv_demand(text, g, types, f.path() + ".path (" + p.string() + ")");
  }
  f.at("kind").fail("unknown demand kind '" + kind + "' (constant, gaussian_mixture or csv)");
}

SolveOptions parse_solver(const Field& f) {
  SolveOptions o;
  o.tol = f.number_or("tol", o.tol);
  o.max_iterations = f.integer_or("max_iterations", o.max_iterations);
  if (f.has("smoothing")) o.smoothing = f.at("smoothing").boolean();
  o.eps_start = f.number_or("eps_start", o.eps_start);
  o.eps_end = f.number_or("eps_end", o.eps_end);
  o.eps_decay = f.number_or("eps_decay", o.eps_decay);
  o.stage_tol = f.number_or("stage_tol", o.stage_tol);
  o.stage_iterations = f.integer_or("stage_iterations", o.stage_iterations);
  o.memory = f.integer_or("memory", o.memory);
  if (!(o.tol > 0.0)) f.at("tol").fail("must be positive");
  if (o.max_iterations < 0) f.at("max_iterations").fail("must be nonnegative");
  if (!(o.eps_decay > 0.0 && o.eps_decay < 1.0)) f.fail("eps_decay must lie in (0, 1)");
  return o;
}

GeneratorSpec parse_generator(const Field& f) {
  GeneratorSpec s;
  if (f.has("seed")) s.seed = f.at("seed").raw().get<std::uint64_t>();
  if (f.has("grid")) s.grid = parse_grid(f.at("grid"));
  s.blobs_per_type = f.integer_or("blobs_per_type", s.blobs_per_type);
  if (f.has("site_classes")) {
    s.site_classes.clear();
    const Field list = f.at("site_classes");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Field c = list.at(k);
      s.site_classes.push_back({c.at("name").string(), c.at("count").integer(), c.at("capacity_share").finite()});
    }
  }
  if (f.has("capacity_shape")) {
    const std::string shape = f.at("capacity_shape").string();
    if (shape == "hump") s.capacity_shape = CapacityShape::Hump;
    else if (shape == "constant") s.capacity_shape = CapacityShape::Constant;
    else f.at("capacity_shape").fail("expected 'hump' or 'constant'");
  }
  s.capacity_pieces = f.integer_or("capacity_pieces", s.capacity_pieces);
  s.hump_peak = f.number_or("hump_peak", s.hump_peak);
  if (f.has("horizon")) {
    const std::vector<double> h = f.at("horizon").numbers();
    if (h.size() != 2) f.at("horizon").fail("expected [t0, t1]");
    s.horizon_start = h[0];
    s.horizon_end = h[1];
  }
  s.total_demand = f.number_or("total_demand", s.total_demand);
  s.capacity_ratio = f.number_or("capacity_ratio", s.capacity_ratio);
  if (f.has("type_weights")) s.type_weights = f.at("type_weights").numbers();
  if (f.has("sensitivities")) s.sensitivities = f.at("sensitivities").numbers();
  if (f.has("ages")) s.ages = f.at("ages").numbers();
  s.cost_base = f.number_or("cost_base", s.cost_base);
  if (f.has("spatial")) s.spatial_cost = parse_spatial(f.at("spatial"));
  s.reward = f.number_or("reward", s.reward);
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(f.path() + ": " + e.what());
  }
  return s;
}

}  // namespace

GeneratorSpec generator_from_json(const Json& section) { return parse_generator(Field(section, "generator")); }

LoadedConfig config_from_json(const Json& document, const std::string& base_dir) {
  if (!document.is_object()) throw ParseError("config: top level must be a table/object");
  const Field root(document, "");
  LoadedConfig out;
  out.canonical = document;
  if (root.has("solver")) out.solve = parse_solver(root.at("solver"));

  if (root.has("generator")) {
    out.generator = parse_generator(root.at("generator"));
    out.scenario = generate(*out.generator);
  } else {
    const SpatialGrid grid = parse_grid(root.at("grid"));
    const Field costs = root.at("costs");
    const Field temporal = costs.at("temporal");
    const int types = static_cast<int>(temporal.size());
    if (types == 0) temporal.fail("at least one demand type is required");
    Scenario& s = out.scenario;
    for (int j = 0; j < types; ++j) s.temporal_costs.push_back(parse_temporal(temporal.at(j)));
    if (costs.has("spatial")) s.spatial_cost = parse_spatial(costs.at("spatial"));
    if (costs.has("mode")) {
      try {
        s.mode = temporal_mode_from_string(costs.at("mode").string());
      } catch (const std::exception& e) {
        costs.at("mode").fail(e.what());
      }
    }
    s.demand = DemandField(grid, parse_demand(root.at("demand"), grid, types, base_dir, out.canonical));
    std::optional<std::pair<double, double>> horizon;
    if (root.has("horizon")) {
      const std::vector<double> h = root.at("horizon").numbers();
      if (h.size() != 2) root.at("horizon").fail("expected [t0, t1]");
      horizon = std::make_pair(h[0], h[1]);
    }
    const Field stations = root.at("stations");
    if (stations.size() == 0) stations.fail("at least one station is required");
    for (std::size_t i = 0; i < stations.size(); ++i) {
      const Field st = stations.at(i);
      Station station;
      station.position = st.at("position").point();
      station.capacity = parse_capacity(st.at("capacity"), horizon);
      station.name = st.has("name") ? st.at("name").string() : "station_" + std::to_string(i + 1);
      s.stations.push_back(std::move(station));
    }
    s.reward = root.at("reward").number();
    s.validate();
  }
  out.checksum = sha256_hex(out.canonical.dump());
  return out;
}

LoadedConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  const std::filesystem::path p(path);
  Json document;
  if (p.extension() == ".toml") {
    try {
      const toml::table table = toml::parse(text, path);
      std::ostringstream ss;
      ss << toml::json_formatter{table};
      document = Json::parse(ss.str());
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << path << ":" << e.source().begin.line << ": " << e.description();
      throw ParseError(msg.str());
    }
  } else {
    try {
      document = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  return config_from_json(document, p.has_parent_path() ? p.parent_path().string() : ".");
}

Scenario load_scenario(const std::string& path) { return load_config(path).scenario; }

}  // namespace stmatch
