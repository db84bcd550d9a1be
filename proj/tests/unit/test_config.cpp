#include <stmatch/config.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace stmatch;
namespace fs = std::filesystem;

namespace {

Json minimal() {
  return Json::parse(R"({
    "grid": {"x_min": 0, "x_max": 1, "y_min": 0, "y_max": 1, "nx": 4, "ny": 4},
    "costs": {"temporal": [{"sensitivity": 1.0}]},
    "demand": {"kind": "constant", "densities": [1.0]},
    "horizon": [0, 5],
    "stations": [{"position": [0.5, 0.5], "capacity": {"rate": 1.0}}],
    "reward": 3.0
  })");
}

std::string parse_message(const Json& doc) {
  try {
    config_from_json(doc);
  } catch (const ParseError& e) {
    return e.what();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stmatch_config_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Config, MinimalScenario) {
  const LoadedConfig c = config_from_json(minimal());
  EXPECT_NEAR(c.scenario.total_demand(), 1.0, 1e-14);
  EXPECT_EQ(c.scenario.station_count(), 1);
  EXPECT_EQ(c.scenario.stations[0].name, "station_1");
  EXPECT_EQ(c.checksum.size(), 64u);
  EXPECT_FALSE(c.generator.has_value());
}

TEST(Config, JsonAndTomlAgree) {
  const LoadedConfig j = load_config(std::string(STMATCH_CONFIG_DIR) + "/hotelling.json");
  const LoadedConfig t = load_config(std::string(STMATCH_CONFIG_DIR) + "/hotelling.toml");
  EXPECT_EQ(j.scenario.demand.densities(), t.scenario.demand.densities());
  EXPECT_EQ(j.scenario.reward, t.scenario.reward);
  EXPECT_EQ(j.scenario.station_count(), t.scenario.station_count());
  for (int i = 0; i < j.scenario.station_count(); ++i)
    EXPECT_EQ(j.scenario.stations[i].capacity.rates(), t.scenario.stations[i].capacity.rates());
  const auto& a = std::get<TwoPieceLinear>(j.scenario.temporal_costs[0]);
  const auto& b = std::get<TwoPieceLinear>(t.scenario.temporal_costs[0]);
  EXPECT_TRUE(a.early_forbidden && b.early_forbidden);
  EXPECT_EQ(a.late_slope, b.late_slope);
  EXPECT_EQ(j.solve.tol, t.solve.tol);
}

TEST(Config, HotellingConfigMatchesEmbedding) {
  const LoadedConfig c = load_config(std::string(STMATCH_CONFIG_DIR) + "/hotelling.json");
  EXPECT_DOUBLE_EQ(c.scenario.stations[0].capacity.rates()[0], 3.0);
  EXPECT_DOUBLE_EQ(c.scenario.stations[1].capacity.rates()[0], 1.0);
  EXPECT_EQ(c.scenario.mode, TemporalMode::HomogeneousPreference);
}

TEST(Config, GeneratorSection) {
  const LoadedConfig c = load_config(std::string(STMATCH_CONFIG_DIR) + "/vaccination.toml");
  ASSERT_TRUE(c.generator.has_value());
  EXPECT_EQ(c.scenario.type_count(), 4);
  EXPECT_EQ(c.scenario.station_count(), 5);
}

TEST(Config, ChecksumIsStableAndSensitive) {
  Json doc = minimal();
  const std::string a = config_from_json(doc).checksum;
  EXPECT_EQ(a, config_from_json(minimal()).checksum);
  doc["reward"] = 3.5;
  EXPECT_NE(a, config_from_json(doc).checksum);
}

TEST(Config, ErrorsNameTheField) {
  Json doc = minimal();
  doc["grid"].erase("nx");
  EXPECT_NE(parse_message(doc).find("grid.nx"), std::string::npos);
  doc = minimal();
  doc["stations"][0]["capacity"]["rate"] = "fast";
  EXPECT_NE(parse_message(doc).find("stations[0].capacity.rate"), std::string::npos);
  doc = minimal();
  doc["demand"]["densities"] = Json::array({1.0, 2.0});
  EXPECT_NE(parse_message(doc).find("demand.densities"), std::string::npos);
  doc = minimal();
  doc["costs"]["temporal"][0]["kind"] = "cubic";
  EXPECT_NE(parse_message(doc).find("costs.temporal[0].kind"), std::string::npos);
  doc = minimal();
  doc["costs"]["mode"] = "mystery";
  EXPECT_NE(parse_message(doc).find("costs.mode"), std::string::npos);
}

TEST(Config, ModelInvariantsAreValidationErrors) {
  Json doc = minimal();
  doc["costs"]["temporal"] = Json::parse(R"([{"sensitivity": 1.0}, {"sensitivity": 2.0}])");
  doc["demand"]["densities"] = Json::array({1.0, 1.0});
  doc["costs"]["mode"] = "homogeneous_preference";
  EXPECT_THROW(config_from_json(doc), ValidationError);
  EXPECT_NE(parse_message(doc).find("sensitivities not strictly decreasing"), std::string::npos);
}

TEST(Config, MalformedFilesAreParseErrors) {
  const fs::path dir = temp_dir("malformed");
  std::ofstream(dir / "bad.json") << "{ not json";
  std::ofstream(dir / "bad.toml") << "grid = [";
  EXPECT_THROW(load_config((dir / "bad.json").string()), ParseError);
  EXPECT_THROW(load_config((dir / "bad.toml").string()), ParseError);
  EXPECT_THROW(load_config((dir / "missing.json").string()), ParseError);
}

TEST(Config, CsvDemandEntersTheChecksum) {
  const fs::path dir = temp_dir("csv");
  Json doc = minimal();
  doc["grid"]["nx"] = 2;
  doc["grid"]["ny"] = 1;
  doc["demand"] = Json::parse(R"({"kind": "csv", "path": "demand.csv"})");
  std::ofstream(dir / "demand.csv") << "ix,iy,type,density\n0,0,1,2.0\n1,0,1,4.0\n";
  const LoadedConfig a = config_from_json(doc, dir.string());
  EXPECT_NEAR(a.scenario.total_demand(), 3.0, 1e-14);
  std::ofstream(dir / "demand.csv") << "ix,iy,type,density\n0,0,1,2.0\n1,0,1,5.0\n";
  const LoadedConfig b = config_from_json(doc, dir.string());
  EXPECT_NE(a.checksum, b.checksum);
  std::ofstream(dir / "demand.csv") << "ix,iy,type,density\n0,0,3,2.0\n";
  EXPECT_THROW(config_from_json(doc, dir.string()), ParseError);
}

TEST(Config, GaussianMixtureWithTypeMasses) {
  Json doc = minimal();
  doc["demand"] = Json::parse(
      R"({"kind": "gaussian_mixture", "components": [{"type": 1, "center": [0.3, 0.4], "sigma": 0.2}], "type_masses": [2.5]})");
  EXPECT_NEAR(config_from_json(doc).scenario.total_demand(), 2.5, 1e-12);
  doc["demand"]["components"][0]["type"] = 2;
  EXPECT_NE(parse_message(doc).find("demand.components[0].type"), std::string::npos);
}

TEST(Config, PiecewiseCapacityAndSolverOptions) {
  Json doc = minimal();
  doc.erase("horizon");
  doc["stations"][0]["capacity"] = Json::parse(R"({"breakpoints": [0, 2, 5], "rates": [1.0, 0.5]})");
  doc["solver"] = Json::parse(R"({"tol": 1e-7, "max_iterations": 50, "smoothing": false})");
  const LoadedConfig c = config_from_json(doc);
  EXPECT_DOUBLE_EQ(c.scenario.total_capacity(), 3.5);
  EXPECT_EQ(c.solve.max_iterations, 50);
  EXPECT_FALSE(c.solve.smoothing);
  EXPECT_EQ(c.solve.tol, 1e-7);
}
