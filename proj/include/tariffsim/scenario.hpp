#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tariffsim/building_metrics.hpp"
#include "tariffsim/milp_model.hpp"
#include "tariffsim/powerflow.hpp"
#include "tariffsim/solver.hpp"
#include "tariffsim/tariff.hpp"

namespace tariffsim {

inline constexpr const char* kScenarioSchema = "tariffsim-scenario/1";
inline constexpr const char* kFleetSchema = "tariffsim-buildings/1";

enum class TariffKind { kFlat, kTimeOfUse, kIndexed, kCapacity, kBlockRate };

// Tariff as written in a scenario file, before it is laid onto a time grid.
// Prices in CHF/kWh.
struct TariffDefinition {
  TariffKind kind = TariffKind::kFlat;
  double import_chf = 0.0;
  double export_chf = 0.0;
  std::vector<PriceWindow> windows;  // time-of-use
  double import_factor = 1.0;        // indexed: factor on the market series
  double export_factor = 1.0;
  double demand_charge = 0.0;  // CHF/kW/month
  bool peak_includes_export = true;
  std::vector<PowerBlock> blocks;
};

// The five bundled scenarios: reference, solar, spot, capacity, block.
TariffDefinition library_tariff(std::string_view name);
std::vector<std::string> library_tariff_names();

TariffScenario build_tariff(const TariffDefinition& def, std::string name, const TimeGrid& grid,
                            const PowerSeries* market);

struct ScenarioConfig {
  std::string name;
  DesignMode mode = DesignMode::kOptimize;
  std::string tariff_name;
  TariffDefinition tariff;
  std::filesystem::path data_dir;
  std::filesystem::path network_path;
  std::filesystem::path output_dir;
  EconomicParameters econ;
  BatteryParameters battery;
  lp::SolveOptions solver;
  std::string solver_name = "builtin";
  PowerFlowOptions power_flow;
  MetricsOptions metrics;
  std::optional<double> export_limit_kw;
};

// Paths in the document are resolved against `base_dir`.
ScenarioConfig parse_scenario_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

// Buildings of a data directory with their load and PV series, before a
// tariff or mode is attached.
struct Fleet {
  std::shared_ptr<const TimeGrid> grid;
  std::vector<BuildingProblem> buildings;
  std::optional<PowerSeries> market;  // CHF/kWh
};

// Reads buildings.json from `data_dir`. With `weeks`, the data must span a
// full year and is subsampled to that many evenly spaced weeks.
Fleet load_fleet(const std::filesystem::path& data_dir, std::optional<int> weeks = std::nullopt);

}  // namespace tariffsim
