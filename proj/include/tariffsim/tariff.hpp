#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tariffsim/timeseries.hpp"

namespace tariffsim {

// Per-step energy prices in CHF/kWh.
struct VolumetricTariff {
  std::vector<double> import_price;
  std::vector<double> export_price;
};

// Flat energy prices plus a monthly charge on the peak exchanged power.
struct CapacityTariff {
  double import_price = 0.0;   // CHF/kWh
  double export_price = 0.0;   // CHF/kWh
  double demand_charge = 0.0;  // CHF/kW/month
  // When false only imports set the monthly peak (sensitivity option).
  bool peak_includes_export = true;
};

struct PowerBlock {
  double upper_kw = 0.0;      // upper end of the block
  double import_slope = 0.0;  // CHF/kWh
  double export_slope = 0.0;  // CHF/kWh
};

// Convex piecewise-linear per-step energy cost. The k-th segment of the
// import cost is p * import_slope_k * ts + import_offset_k and the step cost
// is the maximum over segments; export revenue is the minimum over its own
// segments. The final block extends beyond its nominal upper end.
class BlockRateTariff {
 public:
  BlockRateTariff(std::vector<PowerBlock> blocks, double step_hours);

  const std::vector<PowerBlock>& blocks() const { return blocks_; }
  std::size_t block_count() const { return blocks_.size(); }
  double step_hours() const { return step_hours_; }
  // Breakpoints between consecutive blocks (K - 1 values).
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& import_slopes() const { return import_slopes_; }
  const std::vector<double>& export_slopes() const { return export_slopes_; }
  const std::vector<double>& import_offsets() const { return import_offsets_; }
  const std::vector<double>& export_offsets() const { return export_offsets_; }

  double import_segment(std::size_t k, double power_kw) const {
    return power_kw * import_slopes_[k] * step_hours_ + import_offsets_[k];
  }
  double export_segment(std::size_t k, double power_kw) const {
    return power_kw * export_slopes_[k] * step_hours_ + export_offsets_[k];
  }

 private:
  std::vector<PowerBlock> blocks_;
  double step_hours_;
  std::vector<double> breakpoints_;
  std::vector<double> import_slopes_;
  std::vector<double> export_slopes_;
  std::vector<double> import_offsets_;
  std::vector<double> export_offsets_;
};

struct TariffScenario {
  std::string name;
  std::variant<VolumetricTariff, CapacityTariff, BlockRateTariff> structure;

  bool is_volumetric() const { return std::holds_alternative<VolumetricTariff>(structure); }
  bool is_capacity() const { return std::holds_alternative<CapacityTariff>(structure); }
  bool is_block_rate() const { return std::holds_alternative<BlockRateTariff>(structure); }
};

// Offsets b_k that make the piecewise cost continuous: b_1 = 0 and
// p_k a_k ts + b_k = p_k a_{k+1} ts + b_{k+1} at every breakpoint p_k.
std::vector<double> make_block_offsets(std::span<const double> slopes,
                                       std::span<const double> breakpoints,
                                       double step_hours);

// max_k(import segment) - min_k(export segment) for one step, in CHF.
double block_rate_step_cost(const BlockRateTariff& tariff, double import_kw,
                            double export_kw);

// Grid-exchange cost over the grid's horizon in CHF. Monthly demand charges
// are prorated by the share of each calendar month the grid covers, so a
// full-year grid reproduces the plain monthly sum.
double grid_exchange_cost(const TariffScenario& scenario,
                          std::span<const double> imports,
                          std::span<const double> exports, const TimeGrid& grid);

// Per-step import / export prices seen by a volumetric or capacity tariff;
// block-rate tariffs report their first-block slopes.
double import_price_at(const TariffScenario& scenario, std::size_t step);
double export_price_at(const TariffScenario& scenario, std::size_t step);

// Throws ValidationError if price series do not match the grid or a demand
// charge is negative.
void validate_tariff(const TariffScenario& scenario, const TimeGrid& grid);

// Builders for the scenario library.
TariffScenario make_flat_tariff(std::string name, const TimeGrid& grid,
                                double import_chf, double export_chf);

struct PriceWindow {
  double from_hour = 0.0;  // inclusive
  double to_hour = 0.0;    // exclusive
  double import_chf = 0.0;
  double export_chf = 0.0;
};
// Flat prices outside the windows, window prices inside (by hour of day).
TariffScenario make_time_of_use_tariff(std::string name, const TimeGrid& grid,
                                       double import_chf, double export_chf,
                                       std::span<const PriceWindow> windows);

// Market-indexed volumetric prices: market series (CHF/kWh) times a factor.
TariffScenario make_indexed_tariff(std::string name, std::span<const double> market,
                                   double import_factor, double export_factor);

}  // namespace tariffsim
