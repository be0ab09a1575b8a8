#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "tariffsim/error.hpp"
#include "tariffsim/milp_model.hpp"
#include "tariffsim/scenario.hpp"

using namespace tariffsim;

namespace {

std::shared_ptr<const TimeGrid> hourly(std::size_t steps, const char* start = "2025-06-02") {
  return std::make_shared<const TimeGrid>(3600, steps, parse_date(start));
}

std::size_t count_prefix(const std::vector<std::string>& names, std::string_view prefix) {
  std::size_t n = 0;
  for (const auto& s : names) n += s.rfind(prefix, 0) == 0;
  return n;
}

std::vector<std::string> var_names(const lp::LinearProgram& p) {
  std::vector<std::string> v;
  for (const auto& x : p.variables()) v.push_back(x.name);
  return v;
}

std::vector<std::string> row_names(const lp::LinearProgram& p) {
  std::vector<std::string> v;
  for (const auto& c : p.constraints()) v.push_back(c.name);
  return v;
}

BuildingProblem simple_building(std::shared_ptr<const TimeGrid> grid, TariffScenario tariff,
                                int configs, int max_modules) {
  BuildingProblem bp;
  bp.id = "b";
  bp.grid = grid;
  bp.tariff = std::move(tariff);
  bp.load = {SeriesKind::kLoad, "load", std::vector<double>(grid->step_count(), 1.0)};
  for (int k = 0; k < configs; ++k) {
    PvConfiguration c;
    c.index = k + 1;
    c.max_modules = max_modules;
    c.unit_generation = {SeriesKind::kPvUnit, "pv", std::vector<double>(grid->step_count(), 0.2)};
    bp.pv_configs.push_back(c);
  }
  return bp;
}

double balance_residual(const BuildingDesign& d, const BuildingProblem& bp) {
  double worst = 0.0;
  for (std::size_t t = 0; t < bp.grid->step_count(); ++t) {
    const double pv = bp.pv_power(t, d.modules_per_config);
    worst = std::max(worst, std::abs(d.imports[t] - d.exports[t] - d.charge[t] + d.discharge[t] -
                                     d.curtailment[t] + pv - bp.load.values[t]));
  }
  return worst;
}

const lp::BuiltinMipSolver kSolver;

}  // namespace

TEST_CASE("annuity factor for 3% over 25 years") {
  EconomicParameters e;
  CHECK(e.annuity_factor() == doctest::Approx(0.057428).epsilon(1e-5));
  const double r = 0.03;
  CHECK(e.annuity_factor() == doctest::Approx(r * std::pow(1 + r, 25) / (std::pow(1 + r, 25) - 1)).epsilon(1e-14));
  CHECK(e.battery_replacement_factor() == doctest::Approx(25.0 / 9.0));
}

TEST_CASE("default economic and battery parameters") {
  EconomicParameters e;
  CHECK(e.lifetime_years == 25);
  CHECK(e.battery_lifetime_years == 9);
  CHECK(e.discount_rate == 0.03);
  CHECK(e.pv_fixed_cost == 10049.0);
  CHECK(e.battery_unit_cost == 229.0);
  CHECK(e.battery_fixed_cost == 0.0);
  CHECK(e.pv_maintenance_rate == 0.005);
  PvConfiguration c;
  CHECK(c.unit_nominal_kw == 0.315);
  CHECK(c.unit_cost_chf_per_w == 1.05);
}

TEST_CASE("model structure: one configuration, four steps") {
  auto g = hourly(4);
  auto bp = simple_building(g, make_flat_tariff("reference", *g, 0.2102, 0.0816), 1, 5);
  const auto m = build_problem(bp);
  const auto names = var_names(m.lp);
  CHECK(m.lp.num_variables() == 4 + 6 * 4);
  CHECK(count_prefix(names, "n_mod_") == 1);
  CHECK(count_prefix(names, "e_bat_cap") == 1);
  CHECK(count_prefix(names, "b_pv") == 1);
  CHECK(count_prefix(names, "b_bat") == 1);
  for (const char* p : {"p_imp_", "p_exp_", "p_cha_", "p_dis_", "p_cur_", "soc_"}) {
    CHECK(count_prefix(names, p) == 4);
  }
  CHECK(count_prefix(row_names(m.lp), "balance_") == 4);
  CHECK(m.lp.num_integer_variables() == 3);
  CHECK(m.layout.exclusive_steps.empty());
}

TEST_CASE("model structure: capacity tariff over two months") {
  auto g = hourly(24 * 4, "2025-01-30");
  REQUIRE(g->month_count() == 2);
  auto bp = simple_building(g, TariffScenario{"capacity", CapacityTariff{0.1591, 0.1209, 5.02, true}}, 1, 5);
  const auto m = build_problem(bp);
  CHECK(count_prefix(var_names(m.lp), "p_max_") == 2);
  CHECK(count_prefix(row_names(m.lp), "peak_") == 2 * g->step_count());
  bp.tariff = TariffScenario{"capacity", CapacityTariff{0.1591, 0.1209, 5.02, false}};
  CHECK(count_prefix(row_names(build_problem(bp).lp), "peak_") == g->step_count());
}

TEST_CASE("negative prices add exclusivity binaries only where needed") {
  auto g = hourly(6);
  std::vector<double> market{0.1, -0.05, 0.1, 0.1, 0.1, 0.1};
  auto bp = simple_building(g, make_indexed_tariff("spot", market, 3.9468, 1.604), 1, 5);
  const auto m = build_problem(bp);
  CHECK(m.layout.exclusive_steps == std::vector<std::size_t>{1});
  CHECK(arbitrage_steps(bp.tariff, 6) == std::vector<std::size_t>{1});
}

TEST_CASE("nothing is built when nothing pays") {
  auto g = hourly(4);
  auto bp = simple_building(g, make_flat_tariff("zero", *g, 0.0, 0.0), 1, 5);
  bp.load.values.assign(4, 0.0);
  const auto d = optimize_building(bp, kSolver);
  CHECK(d.modules_per_config[0] == 0);
  CHECK(d.battery_capacity_kwh == 0.0);
  CHECK_FALSE(d.has_pv);
  CHECK_FALSE(d.has_battery);
  CHECK(d.objective == doctest::Approx(0.0));
}

TEST_CASE("load-only building pays the annualized flat energy cost") {
  auto g = hourly(4);
  auto bp = simple_building(g, make_flat_tariff("reference", *g, 0.2102, 0.0816), 0, 0);
  bp.load.values = {1.0, 2.0, 0.5, 1.5};
  bp.battery.enabled = false;
  const auto d = optimize_building(bp, kSolver);
  const double expected = (1.0 + 2.0 + 0.5 + 1.5) * 1.0 * 0.2102 * (8760.0 / 4.0);
  CHECK(d.objective == doctest::Approx(expected).epsilon(1e-9));
  CHECK(d.imports == bp.load.values);
}

TEST_CASE("load-only and full-pv modes force the design") {
  auto g = hourly(24);
  auto bp = simple_building(g, make_flat_tariff("reference", *g, 0.2102, 0.0816), 2, 7);
  bp.mode = DesignMode::kLoadOnly;
  auto d = optimize_building(bp, kSolver);
  CHECK(std::accumulate(d.modules_per_config.begin(), d.modules_per_config.end(), 0) == 0);
  CHECK(d.battery_capacity_kwh == 0.0);
  bp.mode = DesignMode::kFullPv;
  d = optimize_building(bp, kSolver);
  CHECK(d.modules_per_config == std::vector<int>{7, 7});
  CHECK(d.battery_capacity_kwh == 0.0);
  CHECK(d.has_pv);
  CHECK(parse_design_mode("full-pv") == DesignMode::kFullPv);
  CHECK(to_string(DesignMode::kLoadOnly) == "load-only");
  CHECK_THROWS_AS(parse_design_mode("max"), ValidationError);
}

TEST_CASE("two-step toy with cheap PV covers the load, same as enumeration") {
  auto g = hourly(2);
  auto bp = simple_building(g, make_flat_tariff("expensive", *g, 5.0, 0.0), 1, 10);
  bp.load.values = {1.0, 1.0};
  bp.pv_configs[0].unit_generation.values = {0.25, 0.25};
  bp.econ.pv_fixed_cost = 100.0;
  bp.battery.enabled = false;
  const auto m = build_problem(bp);
  lp::SolveOptions opts;
  opts.relative_mip_gap = 1e-12;
  const auto s = kSolver.solve(m.lp, opts);
  const auto e = oracle::enumerate_integers(m.lp);
  REQUIRE(s.optimal());
  REQUIRE(e.objective);
  CHECK(s.objective == doctest::Approx(*e.objective).epsilon(1e-9));
  const auto d = extract_design(s, bp, m);
  CHECK(d.modules_per_config[0] == 4);
  for (double v : d.imports) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("returned designs conserve energy and re-evaluate to the objective") {
  auto g = hourly(48);
  std::vector<TariffScenario> tariffs;
  for (const auto& name : library_tariff_names()) {
    std::vector<double> market(48);
    for (std::size_t t = 0; t < 48; ++t) market[t] = 0.06 + 0.03 * std::sin(t * 0.26) - (t % 24 == 13 ? 0.1 : 0.0);
    PowerSeries ms{SeriesKind::kImportPrice, "m", market};
    tariffs.push_back(build_tariff(library_tariff(name), name, *g, &ms));
  }
  for (std::size_t k = 0; k < tariffs.size(); ++k) {
    CAPTURE(tariffs[k].name);
    oracle::ToyBuildingSpec spec;
    spec.steps = 48;
    spec.max_modules = 12;
    spec.max_battery_kwh = 20.0;
    spec.seed = 100 + k;
    auto bp = oracle::toy_building(spec, tariffs[k], g);
    bp.battery.capacity_unit_kwh = 0.0;
    const auto m = build_problem(bp);
    const auto s = kSolver.solve(m.lp, {});
    REQUIRE(s.optimal());
    const auto d = extract_design(s, bp, m);
    CHECK(balance_residual(d, bp) <= 1e-6);
    const auto c = evaluate_design(d, bp);
    CHECK(c.total == doctest::Approx(d.objective).epsilon(1e-6));
    CHECK(d.has_pv == (std::accumulate(d.modules_per_config.begin(), d.modules_per_config.end(), 0) > 0));
    CHECK(d.has_battery == (d.battery_capacity_kwh > 0.0));
    for (std::size_t t = 0; t < 48; ++t) {
      CHECK(d.curtailment[t] >= 0.0);
      CHECK(d.curtailment[t] <= bp.pv_power(t, d.modules_per_config) + 1e-9);
      CHECK(std::min(d.charge[t], d.discharge[t]) <= 1e-9);
      CHECK(std::min(d.imports[t], d.exports[t]) <= 1e-9);
    }
  }
}

TEST_CASE("raising import prices weakly lowers imported energy") {
  auto g = hourly(8);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    double prev = std::numeric_limits<double>::infinity();
    for (double price : {0.10, 0.2102, 0.40, 0.80}) {
      oracle::ToyBuildingSpec spec;
      spec.seed = seed;
      auto bp = oracle::toy_building(spec, make_flat_tariff("f", *g, price, 0.05), g);
      const auto d = optimize_building(bp, kSolver, {1e-7, 1e-5, 200000, 3600.0, 1e-12, 0});
      const double imported = std::accumulate(d.imports.begin(), d.imports.end(), 0.0);
      CHECK(imported <= prev + 1e-6);
      prev = imported;
    }
  }
}

TEST_CASE("curtailment keeps the model feasible under an export limit") {
  auto g = hourly(6);
  auto bp = simple_building(g, make_flat_tariff("reference", *g, 0.2102, 0.0816), 1, 40);
  bp.mode = DesignMode::kFullPv;
  bp.pv_configs[0].unit_generation.values.assign(6, 0.3);
  bp.export_limit_kw = 2.0;
  const auto d = optimize_building(bp, kSolver);
  for (std::size_t t = 0; t < 6; ++t) CHECK(d.exports[t] <= 2.0 + 1e-9);
  CHECK(balance_residual(d, bp) <= 1e-6);
}

TEST_CASE("problem validation") {
  auto g = hourly(4);
  auto bp = simple_building(g, make_flat_tariff("reference", *g, 0.2102, 0.0816), 1, 5);
  bp.load.values.pop_back();
  CHECK_THROWS_AS(build_problem(bp), ValidationError);
  BatteryParameters b;
  b.soc_min_fraction = 0.9;
  b.soc_max_fraction = 0.5;
  CHECK_THROWS_AS(b.validate(), ValidationError);
  EconomicParameters e;
  e.discount_rate = 0.0;
  CHECK_THROWS_AS(e.validate(), ValidationError);
}
