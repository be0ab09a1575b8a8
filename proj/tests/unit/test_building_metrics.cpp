#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tariffsim/building_metrics.hpp"
#include "tariffsim/error.hpp"
#include "tariffsim/scenario.hpp"

using namespace tariffsim;

namespace {

const lp::BuiltinMipSolver kSolver;

std::shared_ptr<const TimeGrid> hourly(std::size_t steps) {
  return std::make_shared<const TimeGrid>(3600, steps, parse_date("2025-06-02"));
}

BuildingProblem building(std::shared_ptr<const TimeGrid> g, TariffScenario tariff, std::uint64_t seed,
                         int max_modules = 10) {
  oracle::ToyBuildingSpec spec;
  spec.steps = g->step_count();
  spec.max_modules = max_modules;
  spec.max_battery_kwh = 10.0;
  spec.seed = seed;
  auto bp = oracle::toy_building(spec, std::move(tariff), g);
  bp.battery.capacity_unit_kwh = 0.0;
  return bp;
}

}  // namespace

TEST_CASE("load-only identities") {
  auto g = hourly(24);
  auto bp = building(g, make_flat_tariff("reference", *g, 0.2102, 0.0816), 1);
  bp.mode = DesignMode::kLoadOnly;
  const auto d = optimize_building(bp, kSolver);
  const auto r = compute_report(d, bp);
  CHECK(r.pv_host == 0.0);
  CHECK(*r.pv_penetration == 0.0);
  CHECK(*r.bat_auto == 0.0);
  CHECK(r.pv_cur == 0.0);
  CHECK(*r.self_sufficiency == 0.0);
  CHECK(*r.gu_import == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*r.gu_export == 0.0);
  CHECK(r.dpp == 0);
  CHECK(std::abs(*r.lcoe - 0.2102) <= 1e-9);
}

TEST_CASE("load-only LCOE conventions") {
  auto g = hourly(24);
  auto bp = building(g, make_flat_tariff("reference", *g, 0.2102, 0.0816), 2);
  bp.mode = DesignMode::kLoadOnly;
  const auto d = optimize_building(bp, kSolver);
  MetricsOptions o;
  o.lcoe = LcoeConvention::kUndiscountedEnergy;
  const auto r = compute_report(d, bp, o);
  // Discounted costs over undiscounted energy: 0.2102 * annuity-free factor.
  double disc = 0.0;
  for (int y = 1; y <= 25; ++y) disc += std::pow(1.03, -y);
  CHECK(*r.lcoe == doctest::Approx(0.2102 * disc / 25.0).epsilon(1e-12));
  CHECK(*r.lcoe == doctest::Approx(0.1464).epsilon(1e-3));
}

TEST_CASE("zero-investment NPV is the discounted operating cost") {
  auto g = hourly(24);
  auto bp = building(g, make_flat_tariff("reference", *g, 0.2102, 0.0816), 3);
  bp.mode = DesignMode::kLoadOnly;
  const auto d = optimize_building(bp, kSolver);
  const auto r = compute_report(d, bp);
  const double opex0 = grid_exchange_cost(bp.tariff, bp.load.values, std::vector<double>(24, 0.0), *g) *
                       g->annualization();
  double npv = 0.0;
  for (int y = 1; y <= 25; ++y) npv += opex0 * std::pow(1.03, -y);
  CHECK(r.npv == doctest::Approx(npv).epsilon(1e-12));
  const auto cf = cash_flows(d, bp);
  CHECK(cf.design == cf.baseline);
}

TEST_CASE("self-sufficiency: PV always above load without imports") {
  const std::vector<double> load{1.0, 2.0, 0.5};
  const std::vector<double> imports{0.0, 0.0, 0.0};
  const std::vector<double> exports{0.5, 1.0, 2.0};
  CHECK(*self_sufficiency(load, imports, exports) == doctest::Approx(1.0));
  CHECK(*self_sufficiency_net_import(load, imports, exports) <= 1.0);
  const std::vector<double> zero(3, 0.0);
  CHECK_FALSE(self_sufficiency(zero, zero, zero).has_value());
  // Pure import.
  CHECK(*self_sufficiency(load, load, zero) == 0.0);
  CHECK(*self_sufficiency_net_import(load, load, zero) == doctest::Approx(0.0));
}

TEST_CASE("self-sufficiency forms agree on optimized designs") {
  auto g = hourly(48);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const double exp_price = seed % 2 ? 0.0816 : 0.0;
    auto bp = building(g, make_flat_tariff("f", *g, 0.2102, exp_price), seed, 4);
    const auto d = optimize_building(bp, kSolver);
    const auto a = self_sufficiency(bp.load.values, d.imports, d.exports);
    const auto b = self_sufficiency_net_import(bp.load.values, d.imports, d.exports);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(*a >= 0.0);
    CHECK(*a <= 1.0);
    CHECK(std::abs(*a - *b) <= 1e-9);
  }
}

TEST_CASE("report ranges and curtailment share") {
  auto g = hourly(48);
  for (const auto& name : library_tariff_names()) {
    if (name == "spot") continue;
    auto bp = building(g, build_tariff(library_tariff(name), name, *g, nullptr), 11);
    const auto d = optimize_building(bp, kSolver);
    const auto r = compute_report(d, bp);
    CHECK(r.pv_host >= 0.0);
    CHECK(r.pv_host <= 1.0);
    CHECK(r.pv_cur >= 0.0);
    CHECK(r.pv_cur <= 1.0);
    CHECK(*r.gu_import >= 0.0);
    CHECK(*r.gu_export >= 0.0);
    double cur = 0.0;
    for (double v : d.curtailment) cur += v;
    if (cur == 0.0) CHECK(r.pv_cur == 0.0);
    if (r.battery_capacity_kwh > 0.0) {
      double load = 0.0;
      for (double v : bp.load.values) load += v;
      CHECK(*r.bat_auto == doctest::Approx(r.battery_capacity_kwh / (load / 2.0)));
    }
  }
}

TEST_CASE("full-pv design hosts all modules") {
  auto g = hourly(24);
  auto bp = building(g, make_flat_tariff("reference", *g, 0.2102, 0.0816), 5);
  bp.mode = DesignMode::kFullPv;
  const auto r = compute_report(optimize_building(bp, kSolver), bp);
  CHECK(r.pv_host == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.battery_capacity_kwh == 0.0);
}

TEST_CASE("interpolated percentiles") {
  CHECK(interpolated_percentile({7.0}, 25) == 7.0);
  CHECK(interpolated_percentile({7.0}, 75) == 7.0);
  CHECK(interpolated_percentile({23, 14, 19}, 50) == 19.0);
  CHECK(interpolated_percentile({4, 1, 3, 2}, 25) == doctest::Approx(1.75));
  CHECK(interpolated_percentile({4, 1, 3, 2}, 50) == doctest::Approx(2.5));
  CHECK(interpolated_percentile({4, 1, 3, 2}, 75) == doctest::Approx(3.25));
}

TEST_CASE("fleet summary: payback median and undefined values") {
  std::vector<BuildingReport> reps(3);
  const int dpp[] = {14, 19, 23};
  for (int i = 0; i < 3; ++i) {
    reps[i].building_id = "b" + std::to_string(i);
    reps[i].dpp = dpp[i];
  }
  reps[1].lcoe = 0.2;
  const auto s = fleet_summary(reps);
  bool seen_dpp = false;
  for (const auto& m : s) {
    if (m.metric == "dpp") {
      seen_dpp = true;
      CHECK(m.count == 3);
      CHECK(*m.p50 == 19.0);
    }
    if (m.metric == "lcoe") {
      CHECK(m.count == 1);
      CHECK(*m.p25 == 0.2);
      CHECK(*m.p75 == 0.2);
    }
    if (m.metric == "pv_penetration") CHECK_FALSE(m.p50.has_value());
  }
  CHECK(seen_dpp);
}
