#include "tariffsim/milp_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tariffsim/error.hpp"

namespace tariffsim {

using lp::kInfinity;
using lp::Sense;
using lp::Term;

void EconomicParameters::validate() const {
  if (lifetime_years <= 0 || battery_lifetime_years <= 0) {
    throw ValidationError("lifetimes must be positive");
  }
  if (!(discount_rate > 0.0)) throw ValidationError("discount rate must be positive");
  if (pv_fixed_cost < 0 || battery_unit_cost < 0 || battery_fixed_cost < 0 ||
      pv_maintenance_rate < 0) {
    throw ValidationError("cost parameters must be non-negative");
  }
}

double EconomicParameters::annuity_factor() const {
  const double g = std::pow(1.0 + discount_rate, lifetime_years);
  return discount_rate * g / (g - 1.0);
}

void BatteryParameters::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!in_unit(charge_efficiency) || !in_unit(discharge_efficiency)) {
    throw ValidationError("battery efficiencies must lie in (0, 1]");
  }
  if (!(soc_min_fraction >= 0.0 && soc_min_fraction < soc_max_fraction &&
        soc_max_fraction <= 1.0)) {
    throw ValidationError("battery SOC window must satisfy 0 <= min < max <= 1");
  }
  if (!(initial_soc_fraction >= soc_min_fraction && initial_soc_fraction <= soc_max_fraction)) {
    throw ValidationError("initial SOC must lie inside the SOC window");
  }
  if (!(max_c_rate > 0.0)) throw ValidationError("battery C-rate must be positive");
  if (!(max_capacity_kwh >= 0.0) || !std::isfinite(max_capacity_kwh)) {
    throw ValidationError("battery capacity cap must be finite and non-negative");
  }
  if (capacity_unit_kwh < 0.0) throw ValidationError("battery capacity unit must be >= 0");
}

std::string_view to_string(DesignMode mode) {
  switch (mode) {
    case DesignMode::kOptimize:
      return "optimize";
    case DesignMode::kLoadOnly:
      return "load-only";
    case DesignMode::kFullPv:
      return "full-pv";
  }
  return "unknown";
}

DesignMode parse_design_mode(std::string_view text) {
  if (text == "optimize") return DesignMode::kOptimize;
  if (text == "load-only") return DesignMode::kLoadOnly;
  if (text == "full-pv") return DesignMode::kFullPv;
  throw ValidationError(fmt::format("unknown mode '{}'", text));
}

void BuildingProblem::validate() const {
  if (!grid) throw ValidationError(fmt::format("building '{}' has no time grid", id));
  econ.validate();
  battery.validate();
  if (load.kind != SeriesKind::kLoad) {
    throw ValidationError(fmt::format("building '{}': load series has wrong kind", id));
  }
  validate_series(load, *grid);
  for (const auto& cfg : pv_configs) {
    if (cfg.max_modules < 0) {
      throw ValidationError(fmt::format("building '{}': negative module limit", id));
    }
    if (!(cfg.unit_nominal_kw > 0.0) || !(cfg.unit_cost_chf_per_w >= 0.0)) {
      throw ValidationError(fmt::format("building '{}': invalid PV unit data", id));
    }
    validate_series(cfg.unit_generation, *grid);
  }
  validate_tariff(tariff, *grid);
  if (export_limit_kw && !(*export_limit_kw >= 0.0)) {
    throw ValidationError(fmt::format("building '{}': export limit must be >= 0", id));
  }
}

int BuildingProblem::max_total_modules() const {
  int total = 0;
  for (const auto& c : pv_configs) total += c.max_modules;
  return total;
}

double BuildingProblem::max_pv_capacity_kw() const {
  double kw = 0.0;
  for (const auto& c : pv_configs) kw += c.max_modules * c.unit_nominal_kw;
  return kw;
}

double BuildingProblem::pv_power(std::size_t step, const std::vector<int>& modules) const {
  double p = 0.0;
  for (std::size_t i = 0; i < pv_configs.size(); ++i) {
    p += pv_configs[i].unit_generation.values[step] * modules[i];
  }
  return p;
}

double BuildingDesign::installed_pv_kw(const BuildingProblem& bp) const {
  double kw = 0.0;
  for (std::size_t i = 0; i < bp.pv_configs.size(); ++i) {
    kw += modules_per_config[i] * bp.pv_configs[i].unit_nominal_kw;
  }
  return kw;
}

std::vector<std::size_t> arbitrage_steps(const TariffScenario& tariff, std::size_t steps) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < steps; ++t) {
    const double imp = import_price_at(tariff, t);
    const double exp = export_price_at(tariff, t);
    if (imp < 0.0 || exp < 0.0 || exp > imp) out.push_back(t);
  }
  return out;
}

BuildingModel build_problem(const BuildingProblem& bp) {
  bp.validate();
  const TimeGrid& grid = *bp.grid;
  const std::size_t T = grid.step_count();
  const double ts = grid.step_hours();
  const double annuity = bp.econ.annuity_factor();
  const double gamma = bp.econ.pv_maintenance_rate;
  const double bat_factor = annuity * bp.econ.battery_replacement_factor();
  const auto& bat = bp.battery;

  BuildingModel model;
  auto& lp = model.lp;
  auto& L = model.layout;
  L.steps = T;
  L.configs = static_cast<int>(bp.pv_configs.size());
  L.opex_scale = grid.annualization();

  const bool pv_allowed = bp.mode != DesignMode::kLoadOnly;
  const bool bat_allowed = bp.mode == DesignMode::kOptimize && bat.enabled;
  const double cap_max = bat_allowed ? bat.max_capacity_kwh : 0.0;
  if (bat_allowed && bat.capacity_unit_kwh > 0.0 && bat.capacity_unit_kwh > cap_max + 1e-12 &&
      cap_max > 0.0) {
    throw ValidationError(fmt::format(
        "building '{}': battery capacity unit exceeds the capacity cap", bp.id));
  }

  // Sizing columns.
  L.modules = static_cast<int>(lp.num_variables());
  int forced_total = 0;
  for (const auto& cfg : bp.pv_configs) {
    double lo = 0.0;
    double hi = pv_allowed ? cfg.max_modules : 0.0;
    if (bp.mode == DesignMode::kFullPv) lo = hi;
    forced_total += static_cast<int>(lo);
    const double unit = cfg.unit_cost_chf();
    lp.add_variable(fmt::format("n_mod_{}", cfg.index), lo, hi, true,
                    (annuity + gamma) * unit);
  }
  L.battery_capacity = lp.add_variable("e_bat_cap", 0.0, cap_max, false,
                                       bat_factor * bp.econ.battery_unit_cost);
  const int m_pv = pv_allowed ? bp.max_total_modules() : 0;
  double bpv_lo = 0.0;
  if (bp.mode == DesignMode::kFullPv && forced_total > 0) bpv_lo = 1.0;
  L.has_pv = lp.add_variable("b_pv", bpv_lo, m_pv > 0 ? 1.0 : 0.0, true,
                             (annuity + gamma) * bp.econ.pv_fixed_cost);
  L.has_battery = lp.add_variable("b_bat", 0.0, cap_max > 0.0 ? 1.0 : 0.0, true,
                                  bat_factor * bp.econ.battery_fixed_cost);
  if (bat.capacity_unit_kwh > 0.0) {
    const double units = cap_max > 0.0 ? std::floor(cap_max / bat.capacity_unit_kwh + 1e-9) : 0.0;
    L.battery_units = lp.add_variable("n_bat_units", 0.0, units, true, 0.0);
    lp.add_constraint("bat_granularity",
                      {{L.battery_capacity, 1.0}, {L.battery_units, -bat.capacity_unit_kwh}},
                      Sense::kEqual, 0.0);
  }

  // Dispatch columns.
  auto block = [&](const char* stem, double lo, double hi) {
    const int first = static_cast<int>(lp.num_variables());
    for (std::size_t t = 0; t < T; ++t) lp.add_variable(fmt::format("{}_{}", stem, t), lo, hi);
    return first;
  };
  const double export_cap = bp.export_limit_kw ? *bp.export_limit_kw : kInfinity;
  L.imports = block("p_imp", 0.0, kInfinity);
  L.exports = block("p_exp", 0.0, export_cap);
  L.charge = block("p_cha", 0.0, cap_max > 0.0 ? kInfinity : 0.0);
  L.discharge = block("p_dis", 0.0, cap_max > 0.0 ? kInfinity : 0.0);
  L.curtailment = block("p_cur", 0.0, kInfinity);
  L.soc = block("soc", 0.0, cap_max > 0.0 ? kInfinity : 0.0);

  auto pv_terms = [&](std::size_t t, double sign, std::vector<Term>& terms) {
    for (int i = 0; i < L.configs; ++i) {
      const double g = bp.pv_configs[i].unit_generation.values[t];
      if (g != 0.0) terms.push_back({L.modules + i, sign * g});
    }
  };

  for (std::size_t t = 0; t < T; ++t) {
    const int it = static_cast<int>(t);
    std::vector<Term> terms{{L.imports + it, 1.0},
                            {L.exports + it, -1.0},
                            {L.charge + it, -1.0},
                            {L.discharge + it, 1.0},
                            {L.curtailment + it, -1.0}};
    pv_terms(t, 1.0, terms);
    lp.add_constraint(fmt::format("balance_{}", t), std::move(terms), Sense::kEqual,
                      bp.load.values[t]);
  }
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<Term> terms{{L.curtailment + static_cast<int>(t), 1.0}};
    pv_terms(t, -1.0, terms);
    lp.add_constraint(fmt::format("curtail_{}", t), std::move(terms), Sense::kLessEqual, 0.0);
  }

  // Battery: SOC_{t+1} = SOC_t + (eta_c P_cha - P_dis / eta_d) ts, cyclic.
  const double eta_c = bat.charge_efficiency;
  const double eta_d = bat.discharge_efficiency;
  for (std::size_t t = 0; t < T; ++t) {
    const int it = static_cast<int>(t);
    const int next = static_cast<int>((t + 1) % T);
    std::vector<Term> terms{{L.soc + it, -1.0},
                            {L.charge + it, -eta_c * ts},
                            {L.discharge + it, ts / eta_d}};
    if (next != it) {
      terms.push_back({L.soc + next, 1.0});
    } else {
      terms.front().coef = 0.0;
    }
    const bool wrap = t + 1 == T;
    const Sense sense = (wrap && !bat.cyclic) ? Sense::kLessEqual : Sense::kEqual;
    lp.add_constraint(fmt::format("soc_{}", t), std::move(terms), sense, 0.0);
  }
  if (!bat.cyclic) {
    lp.add_constraint("soc_initial",
                      {{L.soc, 1.0}, {L.battery_capacity, -bat.initial_soc_fraction}},
                      Sense::kEqual, 0.0);
  }
  for (std::size_t t = 0; t < T; ++t) {
    const int it = static_cast<int>(t);
    lp.add_constraint(fmt::format("cha_limit_{}", t),
                      {{L.charge + it, 1.0}, {L.battery_capacity, -bat.max_c_rate}},
                      Sense::kLessEqual, 0.0);
    lp.add_constraint(fmt::format("dis_limit_{}", t),
                      {{L.discharge + it, 1.0}, {L.battery_capacity, -bat.max_c_rate}},
                      Sense::kLessEqual, 0.0);
    lp.add_constraint(fmt::format("soc_max_{}", t),
                      {{L.soc + it, 1.0}, {L.battery_capacity, -bat.soc_max_fraction}},
                      Sense::kLessEqual, 0.0);
    lp.add_constraint(fmt::format("soc_min_{}", t),
                      {{L.soc + it, 1.0}, {L.battery_capacity, -bat.soc_min_fraction}},
                      Sense::kGreaterEqual, 0.0);
  }

  // Switching booleans.
  {
    std::vector<Term> terms;
    for (int i = 0; i < L.configs; ++i) terms.push_back({L.modules + i, 1.0});
    terms.push_back({L.has_pv, -static_cast<double>(std::max(m_pv, 0))});
    lp.add_constraint("pv_switch", std::move(terms), Sense::kLessEqual, 0.0);
    lp.add_constraint("bat_switch", {{L.battery_capacity, 1.0}, {L.has_battery, -cap_max}},
                      Sense::kLessEqual, 0.0);
  }

  // Grid exchange cost.
  const double f = L.opex_scale;
  std::visit(
      [&](const auto& tariff) {
        using Tt = std::decay_t<decltype(tariff)>;
        if constexpr (std::is_same_v<Tt, VolumetricTariff>) {
          for (std::size_t t = 0; t < T; ++t) {
            const int it = static_cast<int>(t);
            lp.set_cost(L.imports + it, f * ts * tariff.import_price[t]);
            lp.set_cost(L.exports + it, -f * ts * tariff.export_price[t]);
          }
        } else if constexpr (std::is_same_v<Tt, CapacityTariff>) {
          for (std::size_t t = 0; t < T; ++t) {
            const int it = static_cast<int>(t);
            lp.set_cost(L.imports + it, f * ts * tariff.import_price);
            lp.set_cost(L.exports + it, -f * ts * tariff.export_price);
          }
          L.months = static_cast<int>(grid.month_count());
          L.monthly_peak = static_cast<int>(lp.num_variables());
          for (const auto& m : grid.months()) {
            lp.add_variable(fmt::format("p_max_{}", m.month_index), 0.0, kInfinity, false,
                            f * tariff.demand_charge * m.covered_fraction);
          }
          for (const auto& m : grid.months()) {
            const int pm = L.monthly_peak + m.month_index - 1;
            for (std::size_t t = m.first; t < m.last; ++t) {
              const int it = static_cast<int>(t);
              lp.add_constraint(fmt::format("peak_imp_{}", t),
                                {{pm, 1.0}, {L.imports + it, -1.0}}, Sense::kGreaterEqual, 0.0);
              if (tariff.peak_includes_export) {
                lp.add_constraint(fmt::format("peak_exp_{}", t),
                                  {{pm, 1.0}, {L.exports + it, -1.0}}, Sense::kGreaterEqual,
                                  0.0);
              }
            }
          }
        } else {
          const std::size_t K = tariff.block_count();
          L.import_cost = static_cast<int>(lp.num_variables());
          for (std::size_t t = 0; t < T; ++t) {
            lp.add_variable(fmt::format("c_imp_{}", t), -kInfinity, kInfinity, false, f);
          }
          L.export_revenue = static_cast<int>(lp.num_variables());
          for (std::size_t t = 0; t < T; ++t) {
            lp.add_variable(fmt::format("r_exp_{}", t), -kInfinity, kInfinity, false, -f);
          }
          for (std::size_t t = 0; t < T; ++t) {
            const int it = static_cast<int>(t);
            for (std::size_t k = 0; k < K; ++k) {
              lp.add_constraint(fmt::format("blk_imp_{}_{}", t, k),
                                {{L.import_cost + it, 1.0},
                                 {L.imports + it, -tariff.import_slopes()[k] * ts}},
                                Sense::kGreaterEqual, tariff.import_offsets()[k]);
              lp.add_constraint(fmt::format("blk_exp_{}_{}", t, k),
                                {{L.export_revenue + it, 1.0},
                                 {L.exports + it, -tariff.export_slopes()[k] * ts}},
                                Sense::kLessEqual, tariff.export_offsets()[k]);
            }
          }
        }
      },
      bp.tariff.structure);

  // Exclusivity where prices invite arbitrage through losses or simultaneous
  // import and export.
  L.exclusive_steps = arbitrage_steps(bp.tariff, T);
  const double m_cha = bat.max_c_rate * cap_max;
  for (std::size_t t : L.exclusive_steps) {
    const int it = static_cast<int>(t);
    double pv_max = 0.0;
    for (const auto& cfg : bp.pv_configs) {
      pv_max += cfg.unit_generation.values[t] * (pv_allowed ? cfg.max_modules : 0);
    }
    const double m_imp = bp.load.values[t] + m_cha;
    const double m_exp = pv_max + m_cha;
    if (m_cha > 0.0) {
      const int z = lp.add_variable(fmt::format("z_cha_{}", t), 0.0, 1.0, true);
      L.charge_mode.push_back(z);
      lp.add_constraint(fmt::format("cha_mode_{}", t), {{L.charge + it, 1.0}, {z, -m_cha}},
                        Sense::kLessEqual, 0.0);
      lp.add_constraint(fmt::format("dis_mode_{}", t), {{L.discharge + it, 1.0}, {z, m_cha}},
                        Sense::kLessEqual, m_cha);
    }
    const int w = lp.add_variable(fmt::format("z_imp_{}", t), 0.0, 1.0, true);
    L.import_mode.push_back(w);
    lp.add_constraint(fmt::format("imp_mode_{}", t), {{L.imports + it, 1.0}, {w, -m_imp}},
                      Sense::kLessEqual, 0.0);
    lp.add_constraint(fmt::format("exp_mode_{}", t), {{L.exports + it, 1.0}, {w, m_exp}},
                      Sense::kLessEqual, m_exp);
  }

  lp.validate();
  return model;
}

double solver_grid_cost(const BuildingModel& model, std::span<const double> values) {
  const auto& L = model.layout;
  const auto& c = model.lp.objective();
  double sum = 0.0;
  auto add_block = [&](int first, std::size_t count) {
    if (first < 0) return;
    for (std::size_t k = 0; k < count; ++k) sum += c[first + k] * values[first + k];
  };
  add_block(L.imports, L.steps);
  add_block(L.exports, L.steps);
  add_block(L.monthly_peak, static_cast<std::size_t>(L.months));
  add_block(L.import_cost, L.steps);
  add_block(L.export_revenue, L.steps);
  return sum / L.opex_scale;
}

CostBreakdown evaluate_design(const BuildingDesign& design, const BuildingProblem& bp) {
  const double annuity = bp.econ.annuity_factor();
  CostBreakdown out;
  for (std::size_t i = 0; i < bp.pv_configs.size(); ++i) {
    out.capex_pv += design.modules_per_config[i] * bp.pv_configs[i].unit_cost_chf();
  }
  if (design.has_pv) out.capex_pv += bp.econ.pv_fixed_cost;
  out.capex_battery = design.battery_capacity_kwh * bp.econ.battery_unit_cost;
  if (design.has_battery) out.capex_battery += bp.econ.battery_fixed_cost;
  out.annualized_capex =
      annuity * (out.capex_pv + bp.econ.battery_replacement_factor() * out.capex_battery);
  out.pv_maintenance = bp.econ.pv_maintenance_rate * out.capex_pv;
  out.grid_exchange_horizon =
      grid_exchange_cost(bp.tariff, design.imports, design.exports, *bp.grid);
  out.grid_exchange_annual = out.grid_exchange_horizon * bp.grid->annualization();
  out.annual_opex = out.grid_exchange_annual + out.pv_maintenance;
  out.total = out.annualized_capex + out.annual_opex;
  return out;
}

namespace {

double clean(double v) { return std::abs(v) < 1e-9 ? 0.0 : v; }

// Replaces simultaneous charge/discharge and import/export by the equivalent
// one-directional flows. The energy freed by skipping the round trip is
// absorbed by lower imports, more curtailment, or more exports, in that order.
void net_simultaneous_flows(BuildingDesign& d, const BuildingProblem& bp,
                            const std::vector<bool>& exclusive, std::size_t t) {
  const double eta_c = bp.battery.charge_efficiency;
  const double eta_d = bp.battery.discharge_efficiency;
  const double pv = bp.pv_power(t, d.modules_per_config);
  if (!exclusive[t] && d.charge[t] > 0.0 && d.discharge[t] > 0.0) {
    const double delta_soc = eta_c * d.charge[t] - d.discharge[t] / eta_d;
    double cha = 0.0;
    double dis = 0.0;
    if (delta_soc >= 0.0) {
      cha = delta_soc / eta_c;
    } else {
      dis = -delta_soc * eta_d;
    }
    double surplus = (dis - cha) - (d.discharge[t] - d.charge[t]);
    const double cut_imp = std::min(d.imports[t], surplus);
    const double cut_cur = std::min(std::max(pv - d.curtailment[t], 0.0), surplus - cut_imp);
    const double add_exp = surplus - cut_imp - cut_cur;
    const bool exp_ok = !bp.export_limit_kw || d.exports[t] + add_exp <= *bp.export_limit_kw;
    if (exp_ok) {
      d.charge[t] = cha;
      d.discharge[t] = dis;
      d.imports[t] -= cut_imp;
      d.curtailment[t] += cut_cur;
      d.exports[t] += add_exp;
    }
  }
  if (!exclusive[t] && d.imports[t] > 0.0 && d.exports[t] > 0.0) {
    const double both = std::min(d.imports[t], d.exports[t]);
    d.imports[t] -= both;
    d.exports[t] -= both;
  }
}

}  // namespace

BuildingDesign extract_design(const lp::Solution& solution, const BuildingProblem& bp,
                              const BuildingModel& model) {
  if (!solution.optimal()) {
    throw NumericalError(fmt::format("building '{}': cannot extract a design from a {} solve",
                                     bp.id, lp::to_string(solution.status)));
  }
  const auto& L = model.layout;
  const auto& x = solution.values;
  const std::size_t T = L.steps;
  if (x.size() != model.lp.num_variables()) {
    throw NumericalError(fmt::format("building '{}': solution has {} values, model has {}",
                                     bp.id, x.size(), model.lp.num_variables()));
  }

  BuildingDesign d;
  d.building_id = bp.id;
  d.objective = solution.objective;
  d.mip_gap = solution.mip_gap;
  for (int i = 0; i < L.configs; ++i) {
    d.modules_per_config.push_back(static_cast<int>(std::lround(x[L.modules + i])));
  }
  d.battery_capacity_kwh = clean(x[L.battery_capacity]);
  if (L.battery_units >= 0) {
    d.battery_capacity_kwh =
        std::round(x[L.battery_units]) * bp.battery.capacity_unit_kwh;
  }
  const int total_modules =
      std::accumulate(d.modules_per_config.begin(), d.modules_per_config.end(), 0);
  d.has_pv = total_modules > 0;
  d.has_battery = d.battery_capacity_kwh > 0.0;

  auto take = [&](int first) {
    std::vector<double> v(T);
    for (std::size_t t = 0; t < T; ++t) v[t] = clean(x[first + t]);
    return v;
  };
  d.imports = take(L.imports);
  d.exports = take(L.exports);
  d.charge = take(L.charge);
  d.discharge = take(L.discharge);
  d.curtailment = take(L.curtailment);
  d.soc = take(L.soc);

  constexpr double kTol = 1e-6;
  std::vector<bool> exclusive(T, false);
  for (std::size_t t : L.exclusive_steps) exclusive[t] = true;
  for (std::size_t t = 0; t < T; ++t) {
    for (double* v : {&d.imports[t], &d.exports[t], &d.charge[t], &d.discharge[t],
                      &d.curtailment[t], &d.soc[t]}) {
      if (*v < -kTol) {
        throw NumericalError(fmt::format(
            "building '{}': corrupt solution, negative flow {} at step {}", bp.id, *v, t));
      }
      *v = std::max(*v, 0.0);
    }
    const double pv = bp.pv_power(t, d.modules_per_config);
    if (d.curtailment[t] > pv + kTol) {
      throw NumericalError(fmt::format(
          "building '{}': corrupt solution, curtailment {} above PV {} at step {}", bp.id,
          d.curtailment[t], pv, t));
    }
    d.curtailment[t] = std::min(d.curtailment[t], pv);
    net_simultaneous_flows(d, bp, exclusive, t);
    const double residual = d.imports[t] - d.exports[t] - d.charge[t] + d.discharge[t] -
                            d.curtailment[t] + pv - bp.load.values[t];
    if (std::abs(residual) > kTol) {
      throw NumericalError(fmt::format(
          "building '{}': corrupt solution, energy balance residual {:.3e} at step {}", bp.id,
          residual, t));
    }
  }
  for (const auto& m : bp.grid->months()) {
    double peak = 0.0;
    for (std::size_t t = m.first; t < m.last; ++t) {
      peak = std::max({peak, d.imports[t], d.exports[t]});
    }
    d.monthly_peak.push_back(peak);
  }
  return d;
}

BuildingDesign optimize_building(const BuildingProblem& bp, const lp::MipSolver& solver,
                                 const lp::SolveOptions& opts) {
  const BuildingModel model = build_problem(bp);
  const lp::Solution sol = solver.solve(model.lp, opts);
  if (sol.status == lp::SolveStatus::kInfeasible) {
    throw InfeasibleError(fmt::format("building '{}': model is infeasible", bp.id));
  }
  if (!sol.optimal()) {
    throw NumericalError(fmt::format("building '{}': solver returned {} ({})", bp.id,
                                     lp::to_string(sol.status), sol.diagnostics));
  }
  return extract_design(sol, bp, model);
}

}  // namespace tariffsim
