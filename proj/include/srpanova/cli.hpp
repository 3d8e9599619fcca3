#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "srpanova/dataset.hpp"
#include "srpanova/design.hpp"
#include "srpanova/mcmc.hpp"

namespace srp::cli {

/// Everything a run needs. Loaded from the --config JSON; flags override it.
struct RunConfig {
  std::filesystem::path adjacency;
  std::filesystem::path geometry;
  std::filesystem::path counts;
  std::filesystem::path truth;
  std::filesystem::path output = "out";
  /// Directory holding risk.csv / effects.csv for `report` (default: output).
  std::filesystem::path fit_dir;

  std::string rule = "queen";
  bool drop_islands = false;

  /// Unset means "infer the levels from the counts file".
  std::optional<FactorDesign> design;
  ExpectedMode expected_mode = ExpectedMode::shared_population;

  McmcConfig mcmc;

  std::vector<Family> families;
  bool dedup = true;

  std::string model = "M0";
  std::string orientation;

  bool save_draws = false;
  bool geojson = false;
  bool timings = false;
  bool force = false;
};

/// Relative paths are resolved against `base`. A run manifest is accepted too
/// (its "config" member is used), which is how runs are replayed.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

/// Entry point of the srp-anova executable; returns the process exit code
/// (0 ok, 1 input error, 2 graph validation failure, 3 best ladder model failed).
int run(int argc, const char* const* argv);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace srp::cli
