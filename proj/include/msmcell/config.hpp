#pragma once

#include <optional>
#include <string>

#include "msmcell/sweep.hpp"

namespace msmcell {

struct OutputSpec {
  std::string csv_path = "sweep.csv";
  std::string svg_dir = "plots";
  bool debug_dumps = false;
};

// Fully resolved run description. Geometry defaults to a centered disk with
// volume fraction 0.3; materials default to the standard parameter set.
struct Config {
  CellProblemSpec problem;
  std::optional<GeneratorSpec> generator;
  std::optional<SweepParam> sweep_param;
  std::vector<double> sweep_values;
  OutputSpec output;
};

// Strict parser: unknown keys, wrong types, or out-of-range values raise
// ConfigError naming the offending key path.
Config parse_config_text(const std::string& text, const std::string& origin);
Config load_config(const std::string& path);

}  // namespace msmcell
