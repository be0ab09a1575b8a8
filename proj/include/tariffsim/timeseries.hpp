#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tariffsim {

using Date = std::chrono::year_month_day;

// Non-leap year used whenever a configuration does not name a start date.
inline constexpr Date kDefaultCalendarStart{std::chrono::year{2025},
                                            std::chrono::January,
                                            std::chrono::day{1}};

// Contiguous block of steps belonging to one calendar month.
struct MonthRange {
  int month_index = 0;  // 1..M in horizon order
  std::chrono::year_month calendar_month;
  std::size_t first = 0;  // first step
  std::size_t last = 0;   // one past the last step
  // Share of the calendar month covered by the steps in this range.
  double covered_fraction = 1.0;

  std::size_t size() const { return last - first; }
};

// Temporal backbone shared by every per-step series.
//
// A grid is a strictly increasing list of calendar step offsets measured from
// `calendar_start` in units of `step_seconds`. Ordinary grids are contiguous
// (offset i for step i); grids built from a subsample of weeks are not.
class TimeGrid {
 public:
  TimeGrid(int step_seconds, std::size_t step_count,
           Date calendar_start = kDefaultCalendarStart);
  TimeGrid(int step_seconds, std::vector<std::int64_t> calendar_steps,
           Date calendar_start);

  // Evenly spaced subsample of `weeks` whole weeks out of a year-long grid.
  static TimeGrid subsampled_weeks(int step_seconds, int weeks,
                                   Date calendar_start = kDefaultCalendarStart);

  int step_seconds() const { return step_seconds_; }
  double step_hours() const { return step_seconds_ / 3600.0; }
  std::size_t step_count() const { return calendar_steps_.size(); }
  std::size_t month_count() const { return months_.size(); }
  Date calendar_start() const { return calendar_start_; }

  // 1-based month index of a step.
  int month_of_step(std::size_t step) const { return month_of_step_[step]; }
  const std::vector<int>& month_of_step() const { return month_of_step_; }
  const std::vector<MonthRange>& months() const { return months_; }

  std::int64_t calendar_step(std::size_t step) const {
    return calendar_steps_[step];
  }
  bool contiguous() const;

  std::chrono::sys_seconds time_of_step(std::size_t step) const;
  Date date_of_step(std::size_t step) const;
  // Hour of day at the start of the step, in [0, 24).
  double hour_of_day(std::size_t step) const;

  double horizon_hours() const { return step_count() * step_hours(); }
  double horizon_days() const { return horizon_hours() / 24.0; }
  // Factor that scales horizon operating cost to one 365-day year.
  double annualization() const { return 8760.0 / horizon_hours(); }

  // Identifier of the ISO week containing the step (year * 100 + week).
  int iso_week_of_step(std::size_t step) const;

 private:
  int step_seconds_;
  Date calendar_start_;
  std::vector<std::int64_t> calendar_steps_;
  std::vector<int> month_of_step_;
  std::vector<MonthRange> months_;
};

// Contiguous month ranges for the grid, counted from the grid's calendar
// start. Every step lands in exactly one range.
std::vector<MonthRange> month_partition(const TimeGrid& grid);
std::vector<MonthRange> month_partition(const TimeGrid& grid,
                                        Date calendar_start);

enum class SeriesKind { kLoad, kPvUnit, kImportPrice, kExportPrice, kGeneric };

std::string_view to_string(SeriesKind kind);
bool allows_negative(SeriesKind kind);

struct PowerSeries {
  SeriesKind kind = SeriesKind::kGeneric;
  std::string name;
  // kW for load/pv-unit series, CHF/kWh for price series.
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::span<const double> view() const { return values; }
};

// Throws ValidationError on length mismatch, non-finite values, or negative
// values in a series kind that forbids them.
void validate_series(const PowerSeries& series, const TimeGrid& grid);

// Reads a one-column CSV (header row, one value per line). A header ending in
// "[cts/kWh]" is converted to CHF/kWh on ingestion.
PowerSeries load_series(const std::filesystem::path& path, const TimeGrid& grid,
                        SeriesKind kind);

// Writes a series that load_series reads back bit-exactly.
void write_series(const std::filesystem::path& path, const PowerSeries& series);

Date parse_date(std::string_view iso);
std::string format_date(Date date);

}  // namespace tariffsim
