#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tariffsim/milp_model.hpp"

namespace tariffsim {

enum class LcoeConvention {
  // Lifetime energy discounted like the costs; a load-only building then
  // reports exactly its import tariff.
  kDiscountedEnergy,
  // Discounted costs over undiscounted lifetime energy L * annual energy.
  kUndiscountedEnergy,
};

struct MetricsOptions {
  LcoeConvention lcoe = LcoeConvention::kDiscountedEnergy;
};

struct BuildingReport {
  std::string building_id;
  double pv_capacity_kw = 0.0;
  double battery_capacity_kwh = 0.0;
  double annual_load_kwh = 0.0;
  double annual_cost = 0.0;  // objective re-evaluated, CHF/yr

  double pv_host = 0.0;
  std::optional<double> pv_penetration;
  std::optional<double> bat_auto;  // days
  double pv_cur = 0.0;
  std::optional<double> self_sufficiency;
  std::optional<double> gu_import;
  std::optional<double> gu_export;
  double npv = 0.0;           // CHF
  std::optional<int> dpp;     // years
  std::optional<double> lcoe;  // CHF/kWh
};

// Yearly cash flows of a design: index 0 holds the investment, 1..L the
// operating cost plus battery replacements. `baseline` is the same series
// for the building without any investment.
struct CashFlows {
  std::vector<double> design;
  std::vector<double> baseline;
};

CashFlows cash_flows(const BuildingDesign& design, const BuildingProblem& bp);

// Self-sufficiency in both forms; they agree whenever the dispatch conserves
// energy.
std::optional<double> self_sufficiency(std::span<const double> load,
                                       std::span<const double> imports,
                                       std::span<const double> exports);
std::optional<double> self_sufficiency_net_import(std::span<const double> load,
                                                  std::span<const double> imports,
                                                  std::span<const double> exports);

BuildingReport compute_report(const BuildingDesign& design, const BuildingProblem& bp,
                              const MetricsOptions& opts = {});

struct MetricPercentiles {
  std::string metric;
  std::size_t count = 0;  // reports where the metric is defined
  std::optional<double> p25;
  std::optional<double> p50;
  std::optional<double> p75;
};

// Linear-interpolation percentile (position p/100 * (n - 1) in sorted order).
double interpolated_percentile(std::vector<double> values, double p);

// 25th/50th/75th percentiles of every metric; undefined values are skipped.
std::vector<MetricPercentiles> fleet_summary(const std::vector<BuildingReport>& reports);

}  // namespace tariffsim
