#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "otfs_rach/experiments.hpp"
#include "otfs_rach/geometry.hpp"

namespace otfs {

// ---- configuration ----

// Built-in defaults for every block; the schema a config file is checked against.
const nlohmann::json& default_config();

nlohmann::json load_config_file(const std::string& path);

// Dotted-path assignments, e.g. "mdp.cfo_hz=15000". Values are parsed as JSON
// when possible and kept as strings otherwise. Later assignments win.
void apply_overrides(nlohmann::json& cfg, const std::vector<std::string>& overrides);

// Validates keys and types against the defaults and fills missing entries.
// A top-level "meta" member (as written to <experiment>.meta.json) is dropped.
// Throws ConfigError naming the offending field.
nlohmann::json effective_config(const nlohmann::json& user);

PreambleConfig preamble_from_config(const nlohmann::json& eff);
MdpConfig mdp_from_config(const nlohmann::json& eff);
FalseAlarmOptions calibrate_from_config(const nlohmann::json& eff);
GeometryConfig geometry_from_config(const nlohmann::json& eff);
// detector.root_table resolved from a file path or an inline array.
std::optional<std::vector<int>> root_table_from_config(const nlohmann::json& eff);

// ---- run ----

struct RunOptions {
  std::vector<std::string> overrides;
  int workers = 0;
  std::optional<std::string> output_dir;
};

struct RunResult {
  std::string experiment;
  std::string summary;
  std::string report_text;  // detect-demo only
  std::vector<std::string> files;
  nlohmann::json report = nlohmann::json::object();
  nlohmann::json config;
};

RunResult run_config(nlohmann::json user, const RunOptions& opt);
RunResult run_file(const std::string& config_path, const RunOptions& opt);

}  // namespace otfs
