#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tariffsim/timeseries.hpp"

namespace tariffsim {

// Synthetic PV-favorable fleet on the five-bus feeder.
struct SynthOptions {
  int buildings = 10;
  int days = 7;
  int step_seconds = 3600;
  Date start{std::chrono::year{2025}, std::chrono::June, std::chrono::day{2}};
  std::uint64_t seed = 20250602;
};

// Writes <dir>/data (buildings.json and series CSVs), <dir>/network.json and
// one scenario file per bundled tariff plus the load-only and full-pv bounds
// under <dir>/scenarios. Returns the scenario file paths.
std::vector<std::filesystem::path> write_synthetic_fixture(const std::filesystem::path& dir,
                                                           const SynthOptions& opts = {});

// Names of the scenario files written by write_synthetic_fixture, without
// extension.
std::vector<std::string> synthetic_scenario_names();

}  // namespace tariffsim
