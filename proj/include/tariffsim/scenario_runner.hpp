#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tariffsim/building_metrics.hpp"
#include "tariffsim/grid_metrics.hpp"
#include "tariffsim/scenario.hpp"

namespace tariffsim {

inline constexpr const char* kManifestSchema = "tariffsim-manifest/1";
inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  int jobs = 1;
  std::optional<int> weeks;
  bool plots = false;
  bool dump_lp = false;
  std::optional<std::filesystem::path> metrics_out;
  std::optional<std::filesystem::path> pf_out;
  // Replaces the configured output directory when set.
  std::optional<std::filesystem::path> output_dir;
};

struct RunResult {
  std::string inputs_hash;
  std::shared_ptr<const TimeGrid> grid;
  std::vector<BuildingProblem> problems;
  std::vector<BuildingDesign> designs;
  std::vector<BuildingReport> reports;
  std::vector<MetricPercentiles> fleet;
  std::vector<PowerFlowResult> power_flow;
  GridReport grid_report;
  std::filesystem::path manifest_path;
};

// Hash of everything that defines the physical case (time grid, series,
// building data, network, economic and battery parameters) but not the
// tariff, scenario name or mode, so runs of different scenarios over the
// same inputs share it.
std::string inputs_hash(const Fleet& fleet, const Network& net, const ScenarioConfig& config,
                        std::optional<int> weeks);

// Builds the per-building problems of a scenario.
std::vector<BuildingProblem> scenario_problems(const Fleet& fleet, const ScenarioConfig& config);

// Solves every building, runs the horizon power flow and writes all reports.
// Throws InfeasibleError naming the building, ConvergenceError on too many
// failed power-flow steps, IoError on unwritable outputs.
RunResult run_scenario(const ScenarioConfig& config, const RunOptions& opts = {});

// Side-by-side fleet medians and grid metrics of completed runs with deltas
// against the baseline. Returned as CSV text. Refuses manifests whose inputs
// hash differs from the baseline's.
std::string compare_scenarios(const std::filesystem::path& baseline,
                              const std::vector<std::filesystem::path>& others);

// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

}  // namespace tariffsim
