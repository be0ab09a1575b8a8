#include "tariffsim/scenario_runner.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "parallel.hpp"
#include "report_io.hpp"
#include "tariffsim/error.hpp"

namespace tariffsim {

using nlohmann::json;
namespace fs = std::filesystem;
using detail::format_number;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCategory::kIo, "SHA-256 computation failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string inputs_hash(const Fleet& fleet, const Network& net, const ScenarioConfig& config,
                        std::optional<int> weeks) {
  std::string c;
  const TimeGrid& g = *fleet.grid;
  c += fmt::format("grid {} {} {} {}\n", g.step_seconds(), format_date(g.calendar_start()),
                   g.step_count(), weeks ? *weeks : 0);
  for (std::size_t t = 0; t < g.step_count(); ++t) c += fmt::format("{} ", g.calendar_step(t));
  c += "\n";
  for (const auto& b : fleet.buildings) {
    c += fmt::format("building {}\nload", b.id);
    for (double v : b.load.values) c += fmt::format(" {}", v);
    c += "\n";
    for (const auto& p : b.pv_configs) {
      c += fmt::format("pv {} {} {} {}", p.index, p.max_modules, p.unit_nominal_kw,
                       p.unit_cost_chf_per_w);
      for (double v : p.unit_generation.values) c += fmt::format(" {}", v);
      c += "\n";
    }
  }
  c += network_to_json(net);
  const auto& e = config.econ;
  c += fmt::format("econ {} {} {} {} {} {} {}\n", e.lifetime_years, e.battery_lifetime_years,
                   e.discount_rate, e.pv_fixed_cost, e.battery_unit_cost, e.battery_fixed_cost,
                   e.pv_maintenance_rate);
  const auto& b = config.battery;
  c += fmt::format("battery {} {} {} {} {} {} {} {} {} {}\n", b.enabled, b.charge_efficiency,
                   b.discharge_efficiency, b.max_c_rate, b.soc_min_fraction, b.soc_max_fraction,
                   b.initial_soc_fraction, b.cyclic, b.max_capacity_kwh, b.capacity_unit_kwh);
  c += fmt::format("export_limit {}\n",
                   config.export_limit_kw ? format_number(*config.export_limit_kw) : "none");
  return sha256_hex(c);
}

std::vector<BuildingProblem> scenario_problems(const Fleet& fleet, const ScenarioConfig& config) {
  const TariffScenario tariff = build_tariff(config.tariff, config.tariff_name, *fleet.grid,
                                             fleet.market ? &*fleet.market : nullptr);
  std::vector<BuildingProblem> out;
  for (const auto& base : fleet.buildings) {
    BuildingProblem bp = base;
    bp.tariff = tariff;
    bp.econ = config.econ;
    bp.battery = config.battery;
    bp.mode = config.mode;
    bp.export_limit_kw = config.export_limit_kw;
    bp.validate();
    out.push_back(std::move(bp));
  }
  return out;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Ordered (metric, value) pairs that compare_scenarios tabulates.
std::vector<std::pair<std::string, std::optional<double>>> summary_rows(const RunResult& r) {
  std::vector<std::pair<std::string, std::optional<double>>> rows;
  double pv = 0.0;
  double bat = 0.0;
  for (const auto& rep : r.reports) {
    pv += rep.pv_capacity_kw;
    bat += rep.battery_capacity_kwh;
  }
  rows.emplace_back("total_pv_capacity_kw", pv);
  rows.emplace_back("total_battery_capacity_kwh", bat);
  for (const auto& m : r.fleet) rows.emplace_back("median_" + m.metric, m.p50);
  const auto& g = r.grid_report;
  std::optional<double> worst_above;
  std::optional<double> worst_below;
  for (const auto& b : g.voltage) {
    if (b.above) worst_above = std::max(worst_above.value_or(0.0), *b.above);
    if (b.below) worst_below = std::max(worst_below.value_or(0.0), *b.below);
  }
  double worst_line = 0.0;
  for (const auto& l : g.loading) worst_line = std::max(worst_line, l.percentile);
  rows.emplace_back("worst_p95_voltage_above_pu", worst_above);
  rows.emplace_back("worst_p95_voltage_below_pu", worst_below);
  rows.emplace_back("max_voltage_pu", g.max_voltage_pu);
  rows.emplace_back("min_voltage_pu", g.min_voltage_pu);
  rows.emplace_back("worst_p95_line_loading", worst_line);
  rows.emplace_back("max_reverse_power_kw", g.duration.max_reverse_kw);
  rows.emplace_back("reverse_flow_steps", static_cast<double>(g.duration.reverse_steps));
  rows.emplace_back("hours_above_transformer_rating", g.duration.hours_above_rating);
  rows.emplace_back("en50160_pass", g.en50160.pass ? 1.0 : 0.0);
  return rows;
}

std::string grid_summary_csv(const RunResult& r) {
  std::string s = "metric,value\n";
  for (const auto& [k, v] : summary_rows(r)) {
    s += fmt::format("{},{}\n", k, detail::format_optional(v));
  }
  return s;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& opts) {
  if (opts.jobs < 1) throw ValidationError("jobs must be >= 1");
  const auto t_start = std::chrono::steady_clock::now();
  json timings = json::object();

  const Fleet fleet = load_fleet(config.data_dir, opts.weeks);
  const Network net = load_network(config.network_path);
  for (const auto& b : fleet.buildings) {
    if (!net.building_to_bus.count(b.id)) {
      throw ValidationError(fmt::format("building '{}' is not mapped to a bus in '{}'", b.id,
                                        config.network_path.string()));
    }
  }
  RunResult r;
  r.grid = fleet.grid;
  r.inputs_hash = inputs_hash(fleet, net, config, opts.weeks);
  r.problems = scenario_problems(fleet, config);
  timings["load_s"] = seconds_since(t_start);

  const fs::path out_dir = opts.output_dir.value_or(config.output_dir);
  const fs::path metrics_dir = opts.metrics_out.value_or(out_dir);

  auto t0 = std::chrono::steady_clock::now();
  const auto solver = lp::make_solver(config.solver_name);
  const std::size_t n = r.problems.size();
  r.designs.resize(n);
  std::vector<double> solve_seconds(n, 0.0);
  detail::parallel_for(n, opts.jobs, [&](std::size_t i) {
    const auto ts = std::chrono::steady_clock::now();
    const BuildingProblem& bp = r.problems[i];
    const BuildingModel model = build_problem(bp);
    if (opts.dump_lp) {
      std::ostringstream lp_text;
      model.lp.write_lp_format(lp_text);
      detail::write_text_file(out_dir / "lp" / (bp.id + ".lp"), lp_text.str());
    }
    const lp::Solution sol = solver->solve(model.lp, config.solver);
    if (sol.status == lp::SolveStatus::kInfeasible) {
      throw InfeasibleError(fmt::format("building '{}': design problem is infeasible", bp.id));
    }
    if (!sol.optimal()) {
      throw NumericalError(fmt::format("building '{}': solver stopped with {} ({})", bp.id,
                                       lp::to_string(sol.status), sol.diagnostics));
    }
    r.designs[i] = extract_design(sol, bp, model);
    solve_seconds[i] = seconds_since(ts);
  });
  timings["optimize_s"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < n; ++i) {
    r.reports.push_back(compute_report(r.designs[i], r.problems[i], config.metrics));
  }
  r.fleet = fleet_summary(r.reports);
  timings["metrics_s"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  PowerFlowOptions pf = config.power_flow;
  pf.jobs = opts.jobs;
  r.power_flow = solve_horizon(net, r.designs, fleet.grid->step_count(), pf);
  r.grid_report = compute_grid_report(r.power_flow, *fleet.grid, net);
  timings["power_flow_s"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const double ts = fleet.grid->step_hours();
  std::vector<std::pair<fs::path, std::string>> files = {
      {metrics_dir / "buildings.csv", detail::buildings_csv(r.reports, r.designs)},
      {metrics_dir / "fleet_summary.csv", detail::fleet_csv(r.fleet)},
      {out_dir / "grid_voltage.csv", detail::grid_voltage_csv(r.grid_report)},
      {out_dir / "grid_lines.csv", detail::grid_lines_csv(r.grid_report)},
      {out_dir / "duration_curve.csv", detail::duration_curve_csv(r.grid_report, ts)},
      {out_dir / "en50160.csv", detail::en50160_csv(r.grid_report)},
      {out_dir / "grid_summary.csv", grid_summary_csv(r)},
  };
  if (opts.pf_out) {
    files.emplace_back(*opts.pf_out / "pf_buses.csv", detail::pf_bus_csv(r.power_flow, net));
    files.emplace_back(*opts.pf_out / "pf_lines.csv", detail::pf_line_csv(r.power_flow, net));
  }
  if (opts.plots) {
    files.emplace_back(out_dir / "duration_curve.svg",
                       detail::duration_curve_svg(r.grid_report, net.transformer.rated_power_kw, ts));
    files.emplace_back(out_dir / "line_loading.svg", detail::line_loading_svg(r.grid_report));
    files.emplace_back(out_dir / "voltage_deviation.svg",
                       detail::voltage_deviation_svg(r.grid_report));
  }
  json outputs = json::object();
  for (const auto& [path, text] : files) {
    detail::write_text_file(path, text);
    outputs[path.filename().string()] = {{"path", path.string()}, {"sha256", sha256_hex(text)}};
  }
  timings["write_s"] = seconds_since(t0);
  timings["total_s"] = seconds_since(t_start);

  json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["version"] = kVersion;
  manifest["name"] = config.name;
  manifest["mode"] = std::string(to_string(config.mode));
  manifest["tariff"] = config.tariff_name;
  manifest["inputs_hash"] = r.inputs_hash;
  manifest["solver"] = solver->name();
  manifest["steps"] = fleet.grid->step_count();
  manifest["step_seconds"] = fleet.grid->step_seconds();
  manifest["weeks"] = opts.weeks ? json(*opts.weeks) : json(nullptr);
  manifest["buildings"] = n;
  json summary = json::array();
  for (const auto& [k, v] : summary_rows(r)) summary.push_back({{"metric", k}, {"value", nullable(v)}});
  manifest["summary"] = summary;
  if (r.grid_report.en50160.warning) manifest["warnings"] = {*r.grid_report.en50160.warning};
  json per_building = json::object();
  for (std::size_t i = 0; i < n; ++i) per_building[r.problems[i].id] = solve_seconds[i];
  timings["solve_s_per_building"] = per_building;
  manifest["timings"] = timings;
  manifest["outputs"] = outputs;
  r.manifest_path = out_dir / "manifest.json";
  detail::write_text_file(r.manifest_path, manifest.dump(2) + "\n");
  return r;
}

namespace {

json read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open manifest '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  json m;
  try {
    m = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: not valid JSON: {}", path.string(), e.what()));
  }
  if (!m.is_object() || m.value("schema", "") != kManifestSchema) {
    throw ValidationError(fmt::format("{}: not a run manifest", path.string()));
  }
  return m;
}

}  // namespace

std::string compare_scenarios(const fs::path& baseline, const std::vector<fs::path>& others) {
  if (others.empty()) throw ValidationError("compare needs at least one manifest besides the baseline");
  std::vector<json> runs{read_manifest(baseline)};
  for (const auto& p : others) runs.push_back(read_manifest(p));
  const std::string hash = runs[0].value("inputs_hash", "");
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].value("inputs_hash", "") != hash) {
      throw ValidationError(fmt::format(
          "'{}' was run on different inputs than the baseline (inputs hash {} vs {})",
          others[i - 1].string(), runs[i].value("inputs_hash", ""), hash));
    }
  }
  auto label = [](const json& m) {
    return fmt::format("{}[{}]", m.value("name", "?"), m.value("mode", "?"));
  };
  std::string s = "metric," + label(runs[0]);
  for (std::size_t i = 1; i < runs.size(); ++i) {
    s += fmt::format(",{0},delta_{0}", label(runs[i]));
  }
  s += "\n";
  auto lookup = [](const json& m, const std::string& key) -> std::optional<double> {
    for (const auto& row : m["summary"]) {
      if (row["metric"] == key) {
        if (row["value"].is_null()) return std::nullopt;
        return row["value"].get<double>();
      }
    }
    return std::nullopt;
  };
  for (const auto& row : runs[0]["summary"]) {
    const auto key = row["metric"].get<std::string>();
    const auto base = lookup(runs[0], key);
    s += key + "," + detail::format_optional(base);
    for (std::size_t i = 1; i < runs.size(); ++i) {
      const auto v = lookup(runs[i], key);
      std::optional<double> delta;
      if (v && base) delta = *v - *base;
      s += "," + detail::format_optional(v) + "," + detail::format_optional(delta);
    }
    s += "\n";
  }
  return s;
}

}  // namespace tariffsim
