// Command-line front end: run scenarios, compare runs, write the synthetic
// fixture.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <thread>

#include "tariffsim/error.hpp"
#include "tariffsim/scenario_runner.hpp"
#include "tariffsim/synth.hpp"

namespace {

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tariffsim;
  CLI::App app{"Tariff scenario simulator: building PV/battery sizing and feeder impact"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Optimize every building of a scenario and run the feeder power flow");
  std::string config_path;
  RunOptions ro;
  ro.jobs = default_jobs();
  int weeks = 0;
  std::string metrics_out;
  std::string pf_out;
  std::string out_dir;
  run->add_option("--config", config_path, "Scenario file")->required();
  run->add_option("--jobs", ro.jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--weeks", weeks, "Subsample a full-year data set to N evenly spaced weeks")
      ->check(CLI::Range(1, 52));
  run->add_flag("--plots", ro.plots, "Write SVG plots");
  run->add_flag("--dump-lp", ro.dump_lp, "Write each building model in LP format under <out>/lp");
  run->add_option("--metrics-out", metrics_out, "Directory for building and fleet metric CSVs");
  run->add_option("--pf-out", pf_out, "Directory for per-step power-flow dumps");
  run->add_option("--out", out_dir, "Override the configured output directory");

  auto* cmp = app.add_subcommand("compare", "Tabulate completed runs against a baseline");
  std::string baseline;
  std::vector<std::string> manifests;
  cmp->add_option("--baseline", baseline, "Baseline manifest")->required();
  cmp->add_option("manifests", manifests, "Manifests to compare")->required();

  auto* syn = app.add_subcommand("synth", "Write the synthetic five-bus fixture");
  std::string synth_dir;
  SynthOptions so;
  syn->add_option("--dir", synth_dir, "Target directory")->required();
  syn->add_option("--buildings", so.buildings, "Number of buildings")->check(CLI::PositiveNumber);
  syn->add_option("--days", so.days, "Horizon in days")->check(CLI::PositiveNumber);
  syn->add_option("--step-seconds", so.step_seconds, "Step length")->check(CLI::PositiveNumber);
  syn->add_option("--seed", so.seed, "Random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (weeks > 0) ro.weeks = weeks;
      if (!metrics_out.empty()) ro.metrics_out = metrics_out;
      if (!pf_out.empty()) ro.pf_out = pf_out;
      if (!out_dir.empty()) ro.output_dir = out_dir;
      const ScenarioConfig config = load_scenario_config(config_path);
      const RunResult r = run_scenario(config, ro);
      if (r.grid_report.en50160.warning) {
        fmt::print(stderr, "warning: {}\n", *r.grid_report.en50160.warning);
      }
      fmt::print("{}: {} buildings, {} steps, manifest {}\n", config.name, r.designs.size(),
                 r.grid->step_count(), r.manifest_path.string());
    } else if (*cmp) {
      std::vector<std::filesystem::path> others(manifests.begin(), manifests.end());
      std::cout << compare_scenarios(baseline, others);
    } else if (*syn) {
      for (const auto& p : write_synthetic_fixture(synth_dir, so)) fmt::print("{}\n", p.string());
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
