#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tariffsim/building_metrics.hpp"
#include "tariffsim/grid_metrics.hpp"

namespace tariffsim::detail {

// Shortest round-trip decimal; the same double always prints the same way.
std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);

void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string buildings_csv(const std::vector<BuildingReport>& reports,
                          const std::vector<BuildingDesign>& designs);
std::string fleet_csv(const std::vector<MetricPercentiles>& fleet);
std::string grid_voltage_csv(const GridReport& report);
std::string grid_lines_csv(const GridReport& report);
std::string duration_curve_csv(const GridReport& report, double step_hours);
std::string en50160_csv(const GridReport& report);

// Per-step dumps: bus voltages and line currents.
std::string pf_bus_csv(const std::vector<PowerFlowResult>& results, const Network& net);
std::string pf_line_csv(const std::vector<PowerFlowResult>& results, const Network& net);

std::string duration_curve_svg(const GridReport& report, double rating_kw, double step_hours);
std::string line_loading_svg(const GridReport& report);
std::string voltage_deviation_svg(const GridReport& report);

}  // namespace tariffsim::detail
