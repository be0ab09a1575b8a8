#include "tariffsim/scenario.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "tariffsim/error.hpp"

namespace tariffsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kCts = 0.01;  // CHF per centime

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                std::string_view where) {
  if (!obj.is_object()) throw ValidationError(fmt::format("{} must be an object", where));
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw ValidationError(fmt::format("{}: unknown key '{}'", where, key));
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, std::string_view where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(fmt::format("{}: field '{}' has the wrong type", where, key));
  }
}

template <typename T>
T required(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) throw ValidationError(fmt::format("{}: missing '{}'", where, key));
  return get_or<T>(obj, key, T{}, where);
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{} is not valid JSON: {}", what, e.what()));
  }
}

std::string read_text(const fs::path& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {} '{}'", what, path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TariffDefinition parse_tariff(const json& j) {
  constexpr std::string_view where = "tariff";
  if (j.is_string()) return library_tariff(j.get<std::string>());
  if (!j.is_object()) throw ValidationError("tariff must be a library name or an object");
  if (j.contains("library")) {
    check_keys(j, {"library"}, where);
    return library_tariff(required<std::string>(j, "library", where));
  }
  const auto type = required<std::string>(j, "type", where);
  TariffDefinition d;
  if (type == "flat") {
    check_keys(j, {"type", "import_cts", "export_cts"}, where);
    d.kind = TariffKind::kFlat;
    d.import_chf = required<double>(j, "import_cts", where) * kCts;
    d.export_chf = required<double>(j, "export_cts", where) * kCts;
  } else if (type == "time-of-use") {
    check_keys(j, {"type", "import_cts", "export_cts", "windows"}, where);
    d.kind = TariffKind::kTimeOfUse;
    d.import_chf = required<double>(j, "import_cts", where) * kCts;
    d.export_chf = required<double>(j, "export_cts", where) * kCts;
    for (const auto& w : required<json>(j, "windows", where)) {
      check_keys(w, {"from_hour", "to_hour", "import_cts", "export_cts"}, "tariff window");
      PriceWindow pw;
      pw.from_hour = required<double>(w, "from_hour", "tariff window");
      pw.to_hour = required<double>(w, "to_hour", "tariff window");
      pw.import_chf = required<double>(w, "import_cts", "tariff window") * kCts;
      pw.export_chf = required<double>(w, "export_cts", "tariff window") * kCts;
      if (!(pw.from_hour >= 0.0 && pw.from_hour < pw.to_hour && pw.to_hour <= 24.0)) {
        throw ValidationError("tariff window hours must satisfy 0 <= from < to <= 24");
      }
      d.windows.push_back(pw);
    }
  } else if (type == "indexed") {
    check_keys(j, {"type", "import_factor", "export_factor"}, where);
    d.kind = TariffKind::kIndexed;
    d.import_factor = required<double>(j, "import_factor", where);
    d.export_factor = required<double>(j, "export_factor", where);
  } else if (type == "capacity") {
    check_keys(j, {"type", "import_cts", "export_cts", "demand_chf_per_kw_month",
                   "peak_includes_export"},
               where);
    d.kind = TariffKind::kCapacity;
    d.import_chf = required<double>(j, "import_cts", where) * kCts;
    d.export_chf = required<double>(j, "export_cts", where) * kCts;
    d.demand_charge = required<double>(j, "demand_chf_per_kw_month", where);
    d.peak_includes_export = get_or<bool>(j, "peak_includes_export", true, where);
  } else if (type == "block") {
    check_keys(j, {"type", "blocks"}, where);
    d.kind = TariffKind::kBlockRate;
    for (const auto& b : required<json>(j, "blocks", where)) {
      check_keys(b, {"upper_kw", "import_cts", "export_cts"}, "tariff block");
      d.blocks.push_back({required<double>(b, "upper_kw", "tariff block"),
                          required<double>(b, "import_cts", "tariff block") * kCts,
                          required<double>(b, "export_cts", "tariff block") * kCts});
    }
  } else {
    throw ValidationError(fmt::format("unknown tariff type '{}'", type));
  }
  return d;
}

}  // namespace

TariffDefinition library_tariff(std::string_view name) {
  TariffDefinition d;
  if (name == "reference") {
    d.kind = TariffKind::kFlat;
    d.import_chf = 21.02 * kCts;
    d.export_chf = 8.16 * kCts;
  } else if (name == "solar") {
    d.kind = TariffKind::kTimeOfUse;
    d.import_chf = 23.17 * kCts;
    d.export_chf = 11.12 * kCts;
    d.windows.push_back({11.0, 15.0, 14.68 * kCts, 7.07 * kCts});
  } else if (name == "spot") {
    d.kind = TariffKind::kIndexed;
    d.import_factor = 3.9468;
    d.export_factor = 1.604;
  } else if (name == "capacity") {
    d.kind = TariffKind::kCapacity;
    d.import_chf = 15.91 * kCts;
    d.export_chf = 12.09 * kCts;
    d.demand_charge = 5.02;
  } else if (name == "block") {
    d.kind = TariffKind::kBlockRate;
    const double upper[] = {1, 2, 4, 6, 8, 10};
    const double imp[] = {13.72, 15.06, 16.80, 19.07, 22.01, 25.83};
    const double exp[] = {13.07, 11.73, 9.99, 7.73, 4.79, 0.96};
    for (int k = 0; k < 6; ++k) d.blocks.push_back({upper[k], imp[k] * kCts, exp[k] * kCts});
  } else {
    throw ValidationError(fmt::format("unknown library tariff '{}' (known: {})", name,
                                      fmt::join(library_tariff_names(), ", ")));
  }
  return d;
}

std::vector<std::string> library_tariff_names() {
  return {"reference", "solar", "spot", "capacity", "block"};
}

TariffScenario build_tariff(const TariffDefinition& def, std::string name, const TimeGrid& grid,
                            const PowerSeries* market) {
  switch (def.kind) {
    case TariffKind::kFlat:
      return make_flat_tariff(std::move(name), grid, def.import_chf, def.export_chf);
    case TariffKind::kTimeOfUse:
      return make_time_of_use_tariff(std::move(name), grid, def.import_chf, def.export_chf,
                                     def.windows);
    case TariffKind::kIndexed:
      if (market == nullptr) {
        throw ValidationError(fmt::format(
            "tariff '{}' is market-indexed but the data has no market price series", name));
      }
      return make_indexed_tariff(std::move(name), market->values, def.import_factor,
                                 def.export_factor);
    case TariffKind::kCapacity:
      return TariffScenario{std::move(name),
                            CapacityTariff{def.import_chf, def.export_chf, def.demand_charge,
                                           def.peak_includes_export}};
    case TariffKind::kBlockRate:
      return TariffScenario{std::move(name), BlockRateTariff(def.blocks, grid.step_hours())};
  }
  throw ValidationError("unknown tariff kind");
}

ScenarioConfig parse_scenario_config(std::string_view json_text, const fs::path& base_dir) {
  const json doc = parse_json(json_text, "scenario config");
  check_keys(doc,
             {"schema", "name", "mode", "tariff", "data_dir", "network", "output_dir",
              "economics", "battery", "solver", "power_flow", "metrics", "export_limit_kw"},
             "scenario");
  const auto schema = required<std::string>(doc, "schema", "scenario");
  if (schema != kScenarioSchema) {
    throw ValidationError(
        fmt::format("unsupported scenario schema '{}', expected '{}'", schema, kScenarioSchema));
  }
  ScenarioConfig c;
  c.name = required<std::string>(doc, "name", "scenario");
  if (c.name.empty()) throw ValidationError("scenario name must not be empty");
  c.mode = parse_design_mode(get_or<std::string>(doc, "mode", "optimize", "scenario"));
  if (!doc.contains("tariff")) throw ValidationError("scenario: missing 'tariff'");
  const json& jt = doc["tariff"];
  c.tariff = parse_tariff(jt);
  if (jt.is_string()) {
    c.tariff_name = jt.get<std::string>();
  } else if (jt.contains("library")) {
    c.tariff_name = jt["library"].get<std::string>();
  } else {
    c.tariff_name = "custom-" + jt["type"].get<std::string>();
  }
  auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : base_dir / p; };
  c.data_dir = resolve(required<std::string>(doc, "data_dir", "scenario"));
  c.network_path = resolve(required<std::string>(doc, "network", "scenario"));
  c.output_dir = resolve(get_or<std::string>(doc, "output_dir", "out/" + c.name, "scenario"));

  if (doc.contains("economics")) {
    const json& e = doc["economics"];
    constexpr std::string_view w = "economics";
    check_keys(e,
               {"lifetime_years", "battery_lifetime_years", "discount_rate", "pv_fixed_cost_chf",
                "battery_cost_chf_per_kwh", "battery_fixed_cost_chf", "pv_maintenance_rate"},
               w);
    auto& x = c.econ;
    x.lifetime_years = get_or(e, "lifetime_years", x.lifetime_years, w);
    x.battery_lifetime_years = get_or(e, "battery_lifetime_years", x.battery_lifetime_years, w);
    x.discount_rate = get_or(e, "discount_rate", x.discount_rate, w);
    x.pv_fixed_cost = get_or(e, "pv_fixed_cost_chf", x.pv_fixed_cost, w);
    x.battery_unit_cost = get_or(e, "battery_cost_chf_per_kwh", x.battery_unit_cost, w);
    x.battery_fixed_cost = get_or(e, "battery_fixed_cost_chf", x.battery_fixed_cost, w);
    x.pv_maintenance_rate = get_or(e, "pv_maintenance_rate", x.pv_maintenance_rate, w);
  }
  c.econ.validate();
  if (doc.contains("battery")) {
    const json& b = doc["battery"];
    constexpr std::string_view w = "battery";
    check_keys(b,
               {"enabled", "charge_efficiency", "discharge_efficiency", "max_c_rate", "soc_min",
                "soc_max", "initial_soc", "cyclic", "max_capacity_kwh", "capacity_unit_kwh"},
               w);
    auto& x = c.battery;
    x.enabled = get_or(b, "enabled", x.enabled, w);
    x.charge_efficiency = get_or(b, "charge_efficiency", x.charge_efficiency, w);
    x.discharge_efficiency = get_or(b, "discharge_efficiency", x.discharge_efficiency, w);
    x.max_c_rate = get_or(b, "max_c_rate", x.max_c_rate, w);
    x.soc_min_fraction = get_or(b, "soc_min", x.soc_min_fraction, w);
    x.soc_max_fraction = get_or(b, "soc_max", x.soc_max_fraction, w);
    x.initial_soc_fraction = get_or(b, "initial_soc", x.initial_soc_fraction, w);
    x.cyclic = get_or(b, "cyclic", x.cyclic, w);
    x.max_capacity_kwh = get_or(b, "max_capacity_kwh", x.max_capacity_kwh, w);
    x.capacity_unit_kwh = get_or(b, "capacity_unit_kwh", x.capacity_unit_kwh, w);
  }
  c.battery.validate();
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    constexpr std::string_view w = "solver";
    check_keys(s,
               {"name", "lp_tolerance", "integrality_tolerance", "relative_mip_gap",
                "max_bb_nodes", "time_limit_s"},
               w);
    auto& x = c.solver;
    c.solver_name = get_or(s, "name", c.solver_name, w);
    x.lp_tolerance = get_or(s, "lp_tolerance", x.lp_tolerance, w);
    x.integrality_tolerance = get_or(s, "integrality_tolerance", x.integrality_tolerance, w);
    x.relative_mip_gap = get_or(s, "relative_mip_gap", x.relative_mip_gap, w);
    x.max_bb_nodes = get_or(s, "max_bb_nodes", x.max_bb_nodes, w);
    x.time_limit_s = get_or(s, "time_limit_s", x.time_limit_s, w);
  }
  c.solver.validate();
  lp::make_solver(c.solver_name);  // rejects unknown names early
  if (doc.contains("power_flow")) {
    const json& p = doc["power_flow"];
    constexpr std::string_view w = "power_flow";
    check_keys(p, {"tolerance_pu", "max_iterations", "base_power_kva", "max_flagged_fraction"},
               w);
    auto& x = c.power_flow;
    x.tolerance_pu = get_or(p, "tolerance_pu", x.tolerance_pu, w);
    x.max_iterations = get_or(p, "max_iterations", x.max_iterations, w);
    x.base_power_kva = get_or(p, "base_power_kva", x.base_power_kva, w);
    x.max_flagged_fraction = get_or(p, "max_flagged_fraction", x.max_flagged_fraction, w);
  }
  c.power_flow.validate();
  if (doc.contains("metrics")) {
    const json& m = doc["metrics"];
    check_keys(m, {"lcoe"}, "metrics");
    const auto lcoe = get_or<std::string>(m, "lcoe", "discounted-energy", "metrics");
    if (lcoe == "discounted-energy") {
      c.metrics.lcoe = LcoeConvention::kDiscountedEnergy;
    } else if (lcoe == "undiscounted-energy") {
      c.metrics.lcoe = LcoeConvention::kUndiscountedEnergy;
    } else {
      throw ValidationError(fmt::format("metrics: unknown lcoe convention '{}'", lcoe));
    }
  }
  if (doc.contains("export_limit_kw") && !doc["export_limit_kw"].is_null()) {
    c.export_limit_kw = get_or<double>(doc, "export_limit_kw", 0.0, "scenario");
    if (!(*c.export_limit_kw >= 0.0)) throw ValidationError("export limit must be >= 0");
  }
  return c;
}

ScenarioConfig load_scenario_config(const fs::path& path) {
  const std::string text = read_text(path, "scenario config");
  try {
    return parse_scenario_config(text, path.parent_path());
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

namespace {

PowerSeries subsample(const PowerSeries& full, const TimeGrid& grid) {
  PowerSeries out{full.kind, full.name, {}};
  out.values.reserve(grid.step_count());
  for (std::size_t t = 0; t < grid.step_count(); ++t) {
    out.values.push_back(full.values[static_cast<std::size_t>(grid.calendar_step(t))]);
  }
  return out;
}

}  // namespace

Fleet load_fleet(const fs::path& data_dir, std::optional<int> weeks) {
  const fs::path index = data_dir / "buildings.json";
  const json doc = parse_json(read_text(index, "building index"), index.string());
  constexpr std::string_view w = "buildings.json";
  check_keys(doc, {"schema", "step_seconds", "start", "steps", "market_price", "buildings"}, w);
  const auto schema = required<std::string>(doc, "schema", w);
  if (schema != kFleetSchema) {
    throw ValidationError(
        fmt::format("unsupported building index schema '{}', expected '{}'", schema, kFleetSchema));
  }
  const int step_seconds = required<int>(doc, "step_seconds", w);
  const Date start = parse_date(required<std::string>(doc, "start", w));
  const auto steps = required<std::size_t>(doc, "steps", w);
  if (steps == 0) throw ValidationError("buildings.json: steps must be positive");
  const TimeGrid file_grid(step_seconds, steps, start);

  std::shared_ptr<const TimeGrid> grid;
  if (weeks) {
    const auto year_steps = static_cast<std::size_t>(365LL * 86400 / step_seconds);
    if (steps != year_steps) {
      throw ValidationError(fmt::format(
          "--weeks needs a full-year data set ({} steps), found {}", year_steps, steps));
    }
    grid = std::make_shared<const TimeGrid>(TimeGrid::subsampled_weeks(step_seconds, *weeks, start));
  } else {
    grid = std::make_shared<const TimeGrid>(file_grid);
  }
  auto read = [&](const std::string& file, SeriesKind kind) {
    PowerSeries s = load_series(data_dir / file, file_grid, kind);
    return weeks ? subsample(s, *grid) : s;
  };

  Fleet fleet;
  fleet.grid = grid;
  if (doc.contains("market_price") && !doc["market_price"].is_null()) {
    fleet.market = read(required<std::string>(doc, "market_price", w), SeriesKind::kImportPrice);
  }
  std::set<std::string> ids;
  for (const auto& jb : required<json>(doc, "buildings", w)) {
    check_keys(jb, {"id", "load", "pv"}, "building");
    BuildingProblem bp;
    bp.id = required<std::string>(jb, "id", "building");
    if (bp.id.empty() || !ids.insert(bp.id).second) {
      throw ValidationError(fmt::format("building id '{}' is empty or duplicated", bp.id));
    }
    const std::string where = fmt::format("building '{}'", bp.id);
    bp.grid = grid;
    bp.load = read(required<std::string>(jb, "load", where), SeriesKind::kLoad);
    int next_index = 1;
    for (const auto& jp : get_or<json>(jb, "pv", json::array(), where)) {
      check_keys(jp, {"index", "generation", "max_modules", "unit_nominal_kw", "unit_cost_chf_per_w"},
                 where + " pv");
      PvConfiguration cfg;
      cfg.index = get_or(jp, "index", next_index, where);
      next_index = cfg.index + 1;
      cfg.unit_generation = read(required<std::string>(jp, "generation", where), SeriesKind::kPvUnit);
      cfg.max_modules = required<int>(jp, "max_modules", where);
      cfg.unit_nominal_kw = get_or(jp, "unit_nominal_kw", cfg.unit_nominal_kw, where);
      cfg.unit_cost_chf_per_w = get_or(jp, "unit_cost_chf_per_w", cfg.unit_cost_chf_per_w, where);
      bp.pv_configs.push_back(std::move(cfg));
    }
    fleet.buildings.push_back(std::move(bp));
  }
  if (fleet.buildings.empty()) throw ValidationError("buildings.json lists no buildings");
  return fleet;
}

}  // namespace tariffsim
