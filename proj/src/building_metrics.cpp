#include "tariffsim/building_metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "tariffsim/error.hpp"

namespace tariffsim {

CashFlows cash_flows(const BuildingDesign& design, const BuildingProblem& bp) {
  const CostBreakdown cost = evaluate_design(design, bp);
  const TimeGrid& grid = *bp.grid;
  const std::vector<double> no_export(grid.step_count(), 0.0);
  const double baseline_opex =
      grid_exchange_cost(bp.tariff, bp.load.values, no_export, grid) * grid.annualization();

  const int L = bp.econ.lifetime_years;
  CashFlows cf;
  cf.design.assign(L + 1, cost.annual_opex);
  cf.baseline.assign(L + 1, baseline_opex);
  cf.design[0] = cost.capex_pv + cost.capex_battery;
  cf.baseline[0] = 0.0;
  if (cost.capex_battery > 0.0) {
    for (int y = bp.econ.battery_lifetime_years; y < L; y += bp.econ.battery_lifetime_years) {
      cf.design[y] += cost.capex_battery;
    }
  }
  return cf;
}

std::optional<double> self_sufficiency(std::span<const double> load,
                                       std::span<const double> imports,
                                       std::span<const double> exports) {
  double covered = 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < load.size(); ++t) {
    covered += std::min(load[t], std::max(0.0, exports[t] + load[t] - imports[t]));
    total += load[t];
  }
  if (!(total > 0.0)) return std::nullopt;
  return covered / total;
}

std::optional<double> self_sufficiency_net_import(std::span<const double> load,
                                                  std::span<const double> imports,
                                                  std::span<const double> exports) {
  double net_import = 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < load.size(); ++t) {
    net_import += std::min(load[t], std::max(0.0, imports[t] - exports[t]));
    total += load[t];
  }
  if (!(total > 0.0)) return std::nullopt;
  return 1.0 - net_import / total;
}

BuildingReport compute_report(const BuildingDesign& design, const BuildingProblem& bp,
                              const MetricsOptions& opts) {
  const TimeGrid& grid = *bp.grid;
  const std::size_t T = grid.step_count();
  if (design.imports.size() != T || design.exports.size() != T ||
      design.curtailment.size() != T || design.modules_per_config.size() != bp.pv_configs.size()) {
    throw ValidationError(
        fmt::format("building '{}': design does not match its problem", bp.id));
  }
  const double ts = grid.step_hours();
  const double f = grid.annualization();

  BuildingReport r;
  r.building_id = design.building_id;
  r.pv_capacity_kw = design.installed_pv_kw(bp);
  r.battery_capacity_kwh = design.battery_capacity_kwh;

  double load_kwh = 0.0;
  double pv_kwh = 0.0;
  double cur_kwh = 0.0;
  double max_load = 0.0;
  double max_imp = 0.0;
  double max_exp = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    load_kwh += bp.load.values[t] * ts;
    pv_kwh += bp.pv_power(t, design.modules_per_config) * ts;
    cur_kwh += design.curtailment[t] * ts;
    max_load = std::max(max_load, bp.load.values[t]);
    max_imp = std::max(max_imp, design.imports[t]);
    max_exp = std::max(max_exp, design.exports[t]);
  }
  r.annual_load_kwh = load_kwh * f;

  const double pv_max = bp.max_pv_capacity_kw();
  r.pv_host = pv_max > 0.0 ? r.pv_capacity_kw / pv_max : 0.0;
  if (load_kwh > 0.0) {
    r.pv_penetration = pv_kwh / load_kwh;
    r.bat_auto = design.battery_capacity_kwh / (load_kwh / grid.horizon_days());
  }
  r.pv_cur = cur_kwh > 0.0 && pv_kwh > 0.0 ? cur_kwh / pv_kwh : 0.0;
  if (max_load > 0.0) {
    r.gu_import = max_imp / max_load;
    r.gu_export = max_exp / max_load;
  }
  r.self_sufficiency = self_sufficiency(bp.load.values, design.imports, design.exports);

  const CashFlows cf = cash_flows(design, bp);
  r.annual_cost = evaluate_design(design, bp).total;
  const double rate = bp.econ.discount_rate;
  const int L = bp.econ.lifetime_years;
  double disc = 1.0;
  double cumulative = 0.0;
  double discounted_energy = 0.0;
  const double dpp_tol = 1e-9 * std::max(1.0, std::abs(cf.design[0]));
  for (int y = 0; y <= L; ++y) {
    r.npv += cf.design[y] * disc;
    cumulative += (cf.baseline[y] - cf.design[y]) * disc;
    if (!r.dpp && cumulative >= -dpp_tol) r.dpp = y;
    if (y > 0) discounted_energy += r.annual_load_kwh * disc;
    disc /= 1.0 + rate;
  }
  const double energy = opts.lcoe == LcoeConvention::kDiscountedEnergy
                            ? discounted_energy
                            : L * r.annual_load_kwh;
  if (energy > 0.0) r.lcoe = r.npv / energy;
  return r;
}

double interpolated_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw ValidationError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<MetricPercentiles> fleet_summary(const std::vector<BuildingReport>& reports) {
  if (reports.empty()) throw ValidationError("fleet summary needs at least one report");
  using Getter = std::function<std::optional<double>(const BuildingReport&)>;
  const std::vector<std::pair<std::string, Getter>> metrics = {
      {"pv_capacity_kw", [](const BuildingReport& r) { return std::optional(r.pv_capacity_kw); }},
      {"battery_capacity_kwh",
       [](const BuildingReport& r) { return std::optional(r.battery_capacity_kwh); }},
      {"pv_host", [](const BuildingReport& r) { return std::optional(r.pv_host); }},
      {"pv_penetration", [](const BuildingReport& r) { return r.pv_penetration; }},
      {"bat_auto", [](const BuildingReport& r) { return r.bat_auto; }},
      {"pv_cur", [](const BuildingReport& r) { return std::optional(r.pv_cur); }},
      {"self_sufficiency", [](const BuildingReport& r) { return r.self_sufficiency; }},
      {"gu_import", [](const BuildingReport& r) { return r.gu_import; }},
      {"gu_export", [](const BuildingReport& r) { return r.gu_export; }},
      {"npv", [](const BuildingReport& r) { return std::optional(r.npv); }},
      {"dpp",
       [](const BuildingReport& r) -> std::optional<double> {
         if (!r.dpp) return std::nullopt;
         return static_cast<double>(*r.dpp);
       }},
      {"lcoe", [](const BuildingReport& r) { return r.lcoe; }},
  };
  std::vector<MetricPercentiles> out;
  for (const auto& [name, get] : metrics) {
    std::vector<double> sample;
    for (const auto& r : reports) {
      if (auto v = get(r)) sample.push_back(*v);
    }
    MetricPercentiles row;
    row.metric = name;
    row.count = sample.size();
    if (!sample.empty()) {
      row.p25 = interpolated_percentile(sample, 25.0);
      row.p50 = interpolated_percentile(sample, 50.0);
      row.p75 = interpolated_percentile(sample, 75.0);
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace tariffsim
