#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tariffsim/error.hpp"
#include "tariffsim/scenario.hpp"
#include "tariffsim/tariff.hpp"

using namespace tariffsim;

namespace {

const std::vector<double> kImportCts{13.72, 15.06, 16.80, 19.07, 22.01, 25.83};
const std::vector<double> kExportCts{13.07, 11.73, 9.99, 7.73, 4.79, 0.96};
const std::vector<double> kUpper{1, 2, 4, 6, 8, 10};

BlockRateTariff table_block(double ts) {
  std::vector<PowerBlock> blocks;
  for (std::size_t k = 0; k < kUpper.size(); ++k) {
    blocks.push_back({kUpper[k], kImportCts[k] / 100.0, kExportCts[k] / 100.0});
  }
  return BlockRateTariff(blocks, ts);
}

}  // namespace

TEST_CASE("block offsets: first breakpoint by hand") {
  const std::vector<double> slopes{0.1372, 0.1506};
  const std::vector<double> bp{1.0};
  const auto b = make_block_offsets(slopes, bp, 0.25);
  REQUIRE(b.size() == 2);
  CHECK(b[0] == 0.0);
  // 1 kW * 0.25 h * (13.72 - 15.06) cts = -0.335 cts
  CHECK(b[1] == doctest::Approx(-0.00335).epsilon(1e-12));
}

TEST_CASE("block offsets: single segment and unordered breakpoints") {
  const std::vector<double> one{0.2};
  CHECK(make_block_offsets(one, {}, 0.25) == std::vector<double>{0.0});
  const std::vector<double> slopes{0.1, 0.2, 0.3};
  const std::vector<double> bad{2.0, 1.0};
  CHECK_THROWS_AS(make_block_offsets(slopes, bad, 0.25), ValidationError);
}

TEST_CASE("block cost is continuous at every breakpoint") {
  for (double ts : {0.25, 1.0}) {
    const BlockRateTariff t = table_block(ts);
    REQUIRE(t.breakpoints().size() == 5);
    for (std::size_t k = 0; k + 1 < t.block_count(); ++k) {
      const double p = t.breakpoints()[k];
      CHECK(std::abs(t.import_segment(k, p) - t.import_segment(k + 1, p)) <= 1e-12);
      CHECK(std::abs(t.export_segment(k, p) - t.export_segment(k + 1, p)) <= 1e-12);
    }
  }
}

TEST_CASE("block step cost examples") {
  const BlockRateTariff t = table_block(0.25);
  CHECK(block_rate_step_cost(t, 0.5, 0.0) == doctest::Approx(0.5 * 0.25 * 0.1372).epsilon(1e-14));
  CHECK(block_rate_step_cost(t, 0.0, 0.0) == 0.0);
  // Beyond the last block the final slopes continue.
  const double at10 = block_rate_step_cost(t, 10.0, 0.0);
  const double at11 = block_rate_step_cost(t, 11.0, 0.0);
  CHECK(at11 - at10 == doctest::Approx(0.2583 * 0.25).epsilon(1e-12));
}

TEST_CASE("block import cost convex and increasing, export revenue concave and increasing") {
  const BlockRateTariff t = table_block(0.25);
  const double h = 0.01;
  std::vector<double> imp;
  std::vector<double> rev;
  for (int i = 0; i <= 1200; ++i) {
    imp.push_back(block_rate_step_cost(t, i * h, 0.0));
    rev.push_back(-block_rate_step_cost(t, 0.0, i * h));
  }
  for (std::size_t i = 1; i < imp.size(); ++i) {
    CHECK(imp[i] - imp[i - 1] >= 0.0);
    CHECK(rev[i] - rev[i - 1] >= 0.0);
  }
  for (std::size_t i = 2; i < imp.size(); ++i) {
    CHECK(imp[i] - 2 * imp[i - 1] + imp[i - 2] >= -1e-14);
    CHECK(rev[i] - 2 * rev[i - 1] + rev[i - 2] <= 1e-14);
  }
}

TEST_CASE("flat tariff: one kW for one quarter hour") {
  const TimeGrid g(900, 4);
  const auto t = make_flat_tariff("reference", g, 0.2102, 0.0816);
  const std::vector<double> imp{1.0, 0.0, 0.0, 0.0};
  const std::vector<double> exp(4, 0.0);
  CHECK(grid_exchange_cost(t, imp, exp, g) == doctest::Approx(0.05255).epsilon(1e-14));
  CHECK(grid_exchange_cost(t, exp, exp, g) == 0.0);
  const std::vector<double> out{0.0, 2.0, 0.0, 0.0};
  CHECK(grid_exchange_cost(t, exp, out, g) == doctest::Approx(-2 * 0.25 * 0.0816));
}

TEST_CASE("capacity tariff: constant 2 kW for a year with zero energy prices") {
  const TimeGrid g(900, 35040);
  TariffScenario t{"capacity", CapacityTariff{0.0, 0.0, 5.02, true}};
  const std::vector<double> imp(g.step_count(), 2.0);
  const std::vector<double> exp(g.step_count(), 0.0);
  CHECK(grid_exchange_cost(t, imp, exp, g) == doctest::Approx(120.48).epsilon(1e-12));
  CHECK(grid_exchange_cost(t, exp, exp, g) == 0.0);
}

TEST_CASE("capacity peak counts export unless disabled") {
  const TimeGrid g(3600, 24 * 31);  // January
  std::vector<double> imp(g.step_count(), 1.0);
  std::vector<double> exp(g.step_count(), 0.0);
  exp[5] = 4.0;
  imp[5] = 0.0;
  TariffScenario both{"c", CapacityTariff{0.0, 0.0, 5.0, true}};
  TariffScenario import_only{"c", CapacityTariff{0.0, 0.0, 5.0, false}};
  CHECK(grid_exchange_cost(both, imp, exp, g) == doctest::Approx(20.0));
  CHECK(grid_exchange_cost(import_only, imp, exp, g) == doctest::Approx(5.0));
}

TEST_CASE("capacity cost only depends on monthly maxima") {
  const TimeGrid g(3600, 24 * 59);  // January and February
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<double> imp(g.step_count());
  std::vector<double> exp(g.step_count());
  for (std::size_t i = 0; i < imp.size(); ++i) {
    imp[i] = u(rng);
    exp[i] = u(rng);
  }
  TariffScenario t{"c", CapacityTariff{0.1591, 0.1209, 5.02, true}};
  const double base = grid_exchange_cost(t, imp, exp, g);
  // Shuffle inside each month.
  for (const auto& m : g.months()) {
    std::shuffle(imp.begin() + m.first, imp.begin() + m.last, rng);
    std::shuffle(exp.begin() + m.first, exp.begin() + m.last, rng);
  }
  CHECK(grid_exchange_cost(t, imp, exp, g) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("volumetric cost is linear in the profile") {
  const TimeGrid g(3600, 48);
  const auto t = make_flat_tariff("reference", g, 0.2102, 0.0816);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<double> imp(48);
  std::vector<double> exp(48);
  for (std::size_t i = 0; i < 48; ++i) {
    imp[i] = u(rng);
    exp[i] = u(rng);
  }
  const double c = grid_exchange_cost(t, imp, exp, g);
  for (double a : {0.0, 0.5, 3.0}) {
    std::vector<double> si(imp);
    std::vector<double> se(exp);
    for (auto& v : si) v *= a;
    for (auto& v : se) v *= a;
    CHECK(grid_exchange_cost(t, si, se, g) == doctest::Approx(a * c).epsilon(1e-12));
  }
}

TEST_CASE("time-of-use windows apply by hour of day") {
  const TimeGrid g(3600, 24);
  const std::vector<PriceWindow> w{{11.0, 15.0, 0.1468, 0.0707}};
  const auto t = make_time_of_use_tariff("solar", g, 0.2317, 0.1112, w);
  CHECK(import_price_at(t, 10) == doctest::Approx(0.2317));
  CHECK(import_price_at(t, 11) == doctest::Approx(0.1468));
  CHECK(export_price_at(t, 14) == doctest::Approx(0.0707));
  CHECK(import_price_at(t, 15) == doctest::Approx(0.2317));
}

TEST_CASE("indexed tariff scales the market series") {
  const std::vector<double> market{0.05, -0.01};
  const auto t = make_indexed_tariff("spot", market, 3.9468, 1.604);
  CHECK(import_price_at(t, 0) == doctest::Approx(0.19734));
  CHECK(export_price_at(t, 1) == doctest::Approx(-0.01604));
}

TEST_CASE("misaligned series are rejected") {
  const TimeGrid g(3600, 4);
  const auto t = make_flat_tariff("reference", g, 0.2102, 0.0816);
  const std::vector<double> three(3, 0.0);
  const std::vector<double> four(4, 0.0);
  CHECK_THROWS_AS(grid_exchange_cost(t, three, four, g), ValidationError);
}

TEST_CASE("bundled tariff library prices") {
  const auto ref = library_tariff("reference");
  CHECK(ref.kind == TariffKind::kFlat);
  CHECK(ref.import_chf == doctest::Approx(0.2102));
  CHECK(ref.export_chf == doctest::Approx(0.0816));
  const auto solar = library_tariff("solar");
  CHECK(solar.kind == TariffKind::kTimeOfUse);
  CHECK(solar.import_chf == doctest::Approx(0.2317));
  CHECK(solar.export_chf == doctest::Approx(0.1112));
  REQUIRE(solar.windows.size() == 1);
  CHECK(solar.windows[0].import_chf == doctest::Approx(0.1468));
  CHECK(solar.windows[0].export_chf == doctest::Approx(0.0707));
  const auto spot = library_tariff("spot");
  CHECK(spot.import_factor == doctest::Approx(3.9468));
  CHECK(spot.export_factor == doctest::Approx(1.604));
  const auto cap = library_tariff("capacity");
  CHECK(cap.import_chf == doctest::Approx(0.1591));
  CHECK(cap.export_chf == doctest::Approx(0.1209));
  CHECK(cap.demand_charge == doctest::Approx(5.02));
  const auto block = library_tariff("block");
  REQUIRE(block.blocks.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(block.blocks[k].upper_kw == doctest::Approx(kUpper[k]));
    CHECK(block.blocks[k].import_slope == doctest::Approx(kImportCts[k] / 100.0));
    CHECK(block.blocks[k].export_slope == doctest::Approx(kExportCts[k] / 100.0));
  }
  CHECK_THROWS_AS(library_tariff("nope"), ValidationError);
}
