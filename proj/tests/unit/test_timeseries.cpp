#include <doctest.h>

#include <fstream>
#include <random>

#include "tariffsim/error.hpp"
#include "tariffsim/timeseries.hpp"
#include "temp_dir.hpp"

using namespace tariffsim;

namespace {

void write_lines(const std::filesystem::path& p, const std::string& header, std::size_t n,
                 const std::string& value) {
  std::ofstream out(p);
  out << header << "\n";
  for (std::size_t i = 0; i < n; ++i) out << value << "\n";
}

}  // namespace

TEST_CASE("quarter-hour year has 35040 steps and twelve months") {
  const TimeGrid g(900, 35040);
  CHECK(g.step_count() == 35040);
  CHECK(g.month_count() == 12);
  CHECK(g.step_hours() == doctest::Approx(0.25));
  CHECK(g.annualization() == doctest::Approx(1.0));
  const auto& months = g.months();
  CHECK(months[0].first == 0);
  CHECK(months[0].last == 2976);  // 31 days x 96
  CHECK(months[1].size() == 28 * 96);
  std::size_t total = 0;
  for (const auto& m : months) {
    total += m.size();
    CHECK(m.covered_fraction == doctest::Approx(1.0));
  }
  CHECK(total == g.step_count());
}

TEST_CASE("month_of_step is non-decreasing and covers 1..M") {
  const TimeGrid g(3600, 24 * 100, parse_date("2025-02-20"));
  int prev = 1;
  CHECK(g.month_of_step(0) == 1);
  for (std::size_t t = 0; t < g.step_count(); ++t) {
    CHECK(g.month_of_step(t) >= prev);
    CHECK(g.month_of_step(t) - prev <= 1);
    prev = g.month_of_step(t);
  }
  CHECK(prev == static_cast<int>(g.month_count()));
}

TEST_CASE("single month grid is one range with partial coverage") {
  const TimeGrid g(3600, 24 * 7, parse_date("2025-06-02"));
  REQUIRE(g.month_count() == 1);
  CHECK(g.months()[0].first == 0);
  CHECK(g.months()[0].last == g.step_count());
  CHECK(g.months()[0].covered_fraction == doctest::Approx(7.0 / 30.0));
  CHECK(g.iso_week_of_step(0) == 202523);
  CHECK(g.iso_week_of_step(g.step_count() - 1) == 202523);
  CHECK(g.hour_of_day(13) == doctest::Approx(13.0));
}

TEST_CASE("subsampled weeks keep whole weeks spread over the year") {
  const TimeGrid g = TimeGrid::subsampled_weeks(3600, 4);
  CHECK(g.step_count() == 4 * 168);
  CHECK_FALSE(g.contiguous());
  for (std::size_t t = 1; t < g.step_count(); ++t) {
    CHECK(g.calendar_step(t) > g.calendar_step(t - 1));
  }
  CHECK(g.horizon_days() == doctest::Approx(28.0));
  std::size_t total = 0;
  for (const auto& m : g.months()) total += m.size();
  CHECK(total == g.step_count());
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(TimeGrid(0, 10), ValidationError);
  CHECK_THROWS_AS(TimeGrid(900, 0), ValidationError);
  CHECK_THROWS_AS(parse_date("2025-02-30"), ValidationError);
  CHECK_THROWS_AS(parse_date("June 2"), ValidationError);
}

TEST_CASE("load_series: zero year, off-by-one and sign rule") {
  testing::TempDir dir("series");
  const TimeGrid g(900, 35040);
  write_lines(dir / "zeros.csv", "load [kW]", 35040, "0");
  const PowerSeries s = load_series(dir / "zeros.csv", g, SeriesKind::kLoad);
  CHECK(s.size() == 35040);
  for (double v : s.values) CHECK(v == 0.0);

  write_lines(dir / "short.csv", "load [kW]", 35039, "0");
  CHECK_THROWS_AS(load_series(dir / "short.csv", g, SeriesKind::kLoad), ValidationError);

  const TimeGrid g3(3600, 3);
  {
    std::ofstream out(dir / "neg.csv");
    out << "pv\n0.1\n-0.5\n0.2\n";
  }
  CHECK_THROWS_AS(load_series(dir / "neg.csv", g3, SeriesKind::kPvUnit), ValidationError);
  CHECK_NOTHROW(load_series(dir / "neg.csv", g3, SeriesKind::kImportPrice));
  {
    std::ofstream out(dir / "nan.csv");
    out << "load\n0.1\nnan\n0.2\n";
  }
  CHECK_THROWS_AS(load_series(dir / "nan.csv", g3, SeriesKind::kLoad), ValidationError);
  CHECK_THROWS_AS(load_series(dir / "missing.csv", g3, SeriesKind::kLoad), IoError);
}

TEST_CASE("price series in cts/kWh are converted to CHF/kWh") {
  testing::TempDir dir("cts");
  const TimeGrid g(3600, 2);
  {
    std::ofstream out(dir / "spot.csv");
    out << "spot [cts/kWh]\n21.02\n-3.5\n";
  }
  const PowerSeries s = load_series(dir / "spot.csv", g, SeriesKind::kImportPrice);
  CHECK(s.values[0] == doctest::Approx(0.2102).epsilon(1e-15));
  CHECK(s.values[1] == doctest::Approx(-0.035).epsilon(1e-15));
}

TEST_CASE("write_series then load_series is bit-exact") {
  testing::TempDir dir("roundtrip");
  const TimeGrid g(900, 500);
  std::mt19937_64 rng(3);
  PowerSeries s{SeriesKind::kLoad, "load", {}};
  for (std::size_t i = 0; i < g.step_count(); ++i) {
    s.values.push_back(std::ldexp(static_cast<double>(rng() >> 11), -50));
  }
  s.values[7] = 0.1;
  s.values[8] = 1.0 / 3.0;
  write_series(dir / "s.csv", s);
  const PowerSeries back = load_series(dir / "s.csv", g, SeriesKind::kLoad);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(back.values[i] == s.values[i]);
}
