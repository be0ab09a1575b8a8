#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <optional>
#include <string>
#include <vector>

#include "tariffsim/linear_program.hpp"
#include "tariffsim/solver.hpp"
#include "tariffsim/tariff.hpp"
#include "tariffsim/timeseries.hpp"

namespace tariffsim {

struct PvConfiguration {
  int index = 0;
  PowerSeries unit_generation;  // kW per module
  double unit_nominal_kw = 0.315;
  double unit_cost_chf_per_w = 1.05;
  int max_modules = 0;

  double unit_cost_chf() const { return unit_nominal_kw * 1000.0 * unit_cost_chf_per_w; }
};

struct EconomicParameters {
  int lifetime_years = 25;
  int battery_lifetime_years = 9;
  double discount_rate = 0.03;
  double pv_fixed_cost = 10049.0;      // CHF
  double battery_unit_cost = 229.0;    // CHF/kWh
  double battery_fixed_cost = 0.0;     // CHF
  double pv_maintenance_rate = 0.005;  // share of PV capex per year

  void validate() const;
  // r (1 + r)^L / ((1 + r)^L - 1)
  double annuity_factor() const;
  double battery_replacement_factor() const {
    return static_cast<double>(lifetime_years) / battery_lifetime_years;
  }
};

struct BatteryParameters {
  bool enabled = true;
  double charge_efficiency = 0.95;
  double discharge_efficiency = 0.95;
  double max_c_rate = 1.0;  // kW per kWh of capacity
  double soc_min_fraction = 0.1;
  double soc_max_fraction = 1.0;
  // Used only when `cyclic` is false: SOC at the first step, and the end
  // state may not fall below it.
  double initial_soc_fraction = 0.5;
  bool cyclic = true;
  double max_capacity_kwh = 100.0;
  // Capacity granularity; 0 keeps the capacity continuous.
  double capacity_unit_kwh = 0.0;

  void validate() const;
};

enum class DesignMode { kOptimize, kLoadOnly, kFullPv };

std::string_view to_string(DesignMode mode);
DesignMode parse_design_mode(std::string_view text);

struct BuildingProblem {
  std::string id;
  PowerSeries load;
  std::vector<PvConfiguration> pv_configs;
  TariffScenario tariff;
  EconomicParameters econ;
  BatteryParameters battery;
  std::shared_ptr<const TimeGrid> grid;
  DesignMode mode = DesignMode::kOptimize;
  std::optional<double> export_limit_kw;

  void validate() const;
  int max_total_modules() const;
  // Installed PV power when every configuration is filled (kW).
  double max_pv_capacity_kw() const;
  // PV output at a step for a module assignment (kW).
  double pv_power(std::size_t step, const std::vector<int>& modules) const;
};

// Column indices of one building model. Per-step quantities occupy
// contiguous blocks of `steps` columns starting at the recorded index.
struct ModelLayout {
  std::size_t steps = 0;
  int modules = 0;  // first of pv_configs.size() columns
  int configs = 0;
  int battery_capacity = 0;
  int battery_units = -1;  // integer capacity count when granular
  int has_pv = 0;
  int has_battery = 0;
  int imports = 0;
  int exports = 0;
  int charge = 0;
  int discharge = 0;
  int curtailment = 0;
  int soc = 0;
  int monthly_peak = -1;  // capacity tariff only, one per month
  int months = 0;
  int import_cost = -1;   // block-rate epigraph columns
  int export_revenue = -1;
  // Steps that carry charge/discharge and import/export exclusivity binaries.
  std::vector<std::size_t> exclusive_steps;
  std::vector<int> charge_mode;
  std::vector<int> import_mode;
  // Horizon-to-year scale applied to grid-exchange terms.
  double opex_scale = 1.0;
};

struct BuildingModel {
  lp::LinearProgram lp;
  ModelLayout layout;
};

// Steps at which some price is negative or export pays more than import;
// there the model adds exclusivity binaries.
std::vector<std::size_t> arbitrage_steps(const TariffScenario& tariff, std::size_t steps);

BuildingModel build_problem(const BuildingProblem& bp);

struct BuildingDesign {
  std::string building_id;
  std::vector<int> modules_per_config;
  double battery_capacity_kwh = 0.0;
  bool has_pv = false;
  bool has_battery = false;
  std::vector<double> imports;
  std::vector<double> exports;
  std::vector<double> charge;
  std::vector<double> discharge;
  std::vector<double> curtailment;
  std::vector<double> soc;
  std::vector<double> monthly_peak;
  double objective = 0.0;  // CHF per year
  double mip_gap = 0.0;

  double installed_pv_kw(const BuildingProblem& bp) const;
};

struct CostBreakdown {
  double capex_pv = 0.0;          // CHF, one-off
  double capex_battery = 0.0;     // CHF, one-off per battery
  double annualized_capex = 0.0;  // CHF per year
  double pv_maintenance = 0.0;    // CHF per year
  double grid_exchange_horizon = 0.0;
  double grid_exchange_annual = 0.0;
  double annual_opex = 0.0;
  double total = 0.0;
};

// Closed-form re-evaluation of the objective for a design.
CostBreakdown evaluate_design(const BuildingDesign& design, const BuildingProblem& bp);

// Grid-exchange part of the solver objective, scaled back to the horizon.
double solver_grid_cost(const BuildingModel& model, std::span<const double> values);

// Converts an optimal solution into a design and re-checks its invariants.
// Throws NumericalError when the point violates the model beyond tolerance.
BuildingDesign extract_design(const lp::Solution& solution, const BuildingProblem& bp,
                              const BuildingModel& model);

// build_problem + solve + extract_design. Throws InfeasibleError when no
// design exists.
BuildingDesign optimize_building(const BuildingProblem& bp, const lp::MipSolver& solver,
                                 const lp::SolveOptions& opts = {});

}  // namespace tariffsim
