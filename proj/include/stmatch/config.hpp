#pragma once

#include <stmatch/io.hpp>
#include <stmatch/scenarios.hpp>
#include <stmatch/solver.hpp>

#include <optional>
#include <string>

namespace stmatch {

struct LoadedConfig {
  Scenario scenario;
  SolveOptions solve;
  std::optional<GeneratorSpec> generator;
  Json canonical;        // parsed document; TOML is converted to the same JSON shape
  std::string checksum;  // SHA-256 of the canonical dump (plus referenced data files)
};

/// Reads a .json or .toml scenario file. Throws ParseError naming the offending field and
/// ValidationError for model invariants.
LoadedConfig load_config(const std::string& path);

/// base_dir resolves relative data paths (demand CSV).
LoadedConfig config_from_json(const Json& document, const std::string& base_dir = ".");

GeneratorSpec generator_from_json(const Json& section);

Scenario load_scenario(const std::string& path);

}  // namespace stmatch
