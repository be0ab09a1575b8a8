#include "tariffsim/timeseries.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tariffsim/error.hpp"

namespace tariffsim {

namespace {

using std::chrono::days;
using std::chrono::seconds;
using std::chrono::sys_days;

void check_step_seconds(int step_seconds) {
  if (step_seconds <= 0) {
    throw ValidationError(fmt::format("step length must be positive, got {} s",
                                      step_seconds));
  }
  if (86400 % step_seconds != 0) {
    throw ValidationError(fmt::format(
        "step length {} s does not divide a day evenly", step_seconds));
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r' || s.front() == '\n')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

bool ends_with_unit(std::string_view header, std::string_view unit) {
  header = trim(header);
  return header.size() >= unit.size() &&
         header.substr(header.size() - unit.size()) == unit;
}

}  // namespace

TimeGrid::TimeGrid(int step_seconds, std::size_t step_count,
                   Date calendar_start)
    : step_seconds_(step_seconds), calendar_start_(calendar_start) {
  check_step_seconds(step_seconds);
  if (step_count == 0) {
    throw ValidationError("time grid must contain at least one step");
  }
  calendar_steps_.resize(step_count);
  for (std::size_t i = 0; i < step_count; ++i) {
    calendar_steps_[i] = static_cast<std::int64_t>(i);
  }
  months_ = month_partition(*this);
  month_of_step_.resize(step_count);
  for (const auto& m : months_) {
    std::fill(month_of_step_.begin() + m.first, month_of_step_.begin() + m.last,
              m.month_index);
  }
}

TimeGrid::TimeGrid(int step_seconds, std::vector<std::int64_t> calendar_steps,
                   Date calendar_start)
    : step_seconds_(step_seconds),
      calendar_start_(calendar_start),
      calendar_steps_(std::move(calendar_steps)) {
  check_step_seconds(step_seconds);
  if (calendar_steps_.empty()) {
    throw ValidationError("time grid must contain at least one step");
  }
  for (std::size_t i = 1; i < calendar_steps_.size(); ++i) {
    if (calendar_steps_[i] <= calendar_steps_[i - 1]) {
      throw ValidationError("calendar steps must be strictly increasing");
    }
  }
  if (calendar_steps_.front() < 0) {
    throw ValidationError("calendar steps must be non-negative");
  }
  months_ = month_partition(*this);
  month_of_step_.resize(step_count());
  for (const auto& m : months_) {
    std::fill(month_of_step_.begin() + m.first, month_of_step_.begin() + m.last,
              m.month_index);
  }
}

TimeGrid TimeGrid::subsampled_weeks(int step_seconds, int weeks,
                                    Date calendar_start) {
  check_step_seconds(step_seconds);
  if (weeks < 1 || weeks > 52) {
    throw ValidationError(
        fmt::format("week subsample must be in 1..52, got {}", weeks));
  }
  const std::int64_t per_week = 7LL * 86400 / step_seconds;
  std::vector<std::int64_t> steps;
  steps.reserve(static_cast<std::size_t>(weeks * per_week));
  for (int i = 0; i < weeks; ++i) {
    const std::int64_t week = static_cast<std::int64_t>(i) * 52 / weeks;
    for (std::int64_t k = 0; k < per_week; ++k) {
      steps.push_back(week * per_week + k);
    }
  }
  return TimeGrid(step_seconds, std::move(steps), calendar_start);
}

bool TimeGrid::contiguous() const {
  return calendar_steps_.back() - calendar_steps_.front() + 1 ==
         static_cast<std::int64_t>(calendar_steps_.size());
}

std::chrono::sys_seconds TimeGrid::time_of_step(std::size_t step) const {
  return std::chrono::sys_seconds{sys_days{calendar_start_}} +
         seconds{calendar_steps_[step] * step_seconds_};
}

Date TimeGrid::date_of_step(std::size_t step) const {
  return Date{std::chrono::floor<days>(time_of_step(step))};
}

double TimeGrid::hour_of_day(std::size_t step) const {
  const std::int64_t secs = calendar_steps_[step] * step_seconds_;
  return static_cast<double>(secs % 86400) / 3600.0;
}

int TimeGrid::iso_week_of_step(std::size_t step) const {
  const sys_days day{date_of_step(step)};
  const std::chrono::weekday wd{day};
  const int iso_wd = static_cast<int>(wd.iso_encoding());  // Mon=1..Sun=7
  const sys_days thursday = day + days{4 - iso_wd};
  const Date th{thursday};
  const sys_days jan1{th.year() / std::chrono::January / 1};
  const int week = static_cast<int>((thursday - jan1).count()) / 7 + 1;
  return static_cast<int>(th.year()) * 100 + week;
}

std::vector<MonthRange> month_partition(const TimeGrid& grid) {
  return month_partition(grid, grid.calendar_start());
}

std::vector<MonthRange> month_partition(const TimeGrid& grid,
                                        Date calendar_start) {
  if (!calendar_start.ok()) {
    throw ValidationError("calendar start is not a valid date");
  }
  const std::int64_t step_s = grid.step_seconds();
  const double steps_per_day = 86400.0 / static_cast<double>(step_s);
  const auto origin = std::chrono::sys_seconds{sys_days{calendar_start}};

  std::vector<MonthRange> out;
  for (std::size_t i = 0; i < grid.step_count(); ++i) {
    const auto t = origin + seconds{grid.calendar_step(i) * step_s};
    const Date d{std::chrono::floor<days>(t)};
    const std::chrono::year_month ym{d.year(), d.month()};
    if (out.empty() || out.back().calendar_month != ym) {
      MonthRange r;
      r.month_index = static_cast<int>(out.size()) + 1;
      r.calendar_month = ym;
      r.first = i;
      out.push_back(r);
    }
    out.back().last = i + 1;
  }
  for (auto& r : out) {
    const auto last_day = std::chrono::year_month_day_last{
        r.calendar_month.year(),
        std::chrono::month_day_last{r.calendar_month.month()}};
    const double month_steps =
        static_cast<double>(static_cast<unsigned>(last_day.day())) *
        steps_per_day;
    r.covered_fraction = static_cast<double>(r.size()) / month_steps;
  }
  return out;
}

std::string_view to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::kLoad:
      return "load";
    case SeriesKind::kPvUnit:
      return "pv-unit";
    case SeriesKind::kImportPrice:
      return "import-price";
    case SeriesKind::kExportPrice:
      return "export-price";
    case SeriesKind::kGeneric:
      return "generic";
  }
  return "unknown";
}

bool allows_negative(SeriesKind kind) {
  return kind != SeriesKind::kLoad && kind != SeriesKind::kPvUnit;
}

void validate_series(const PowerSeries& series, const TimeGrid& grid) {
  if (series.values.size() != grid.step_count()) {
    throw ValidationError(fmt::format(
        "length mismatch for {} series '{}': {} values, grid has {} steps",
        to_string(series.kind), series.name, series.values.size(),
        grid.step_count()));
  }
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const double v = series.values[i];
    if (!std::isfinite(v)) {
      throw ValidationError(fmt::format("non-finite value in series '{}' at step {}",
                                        series.name, i));
    }
    if (v < 0.0 && !allows_negative(series.kind)) {
      throw ValidationError(fmt::format(
          "negative value {} in {} series '{}' at step {}", v,
          to_string(series.kind), series.name, i));
    }
  }
}

PowerSeries load_series(const std::filesystem::path& path, const TimeGrid& grid,
                        SeriesKind kind) {
  std::ifstream in(path);
  if (!in) {
    throw IoError(fmt::format("cannot open series file '{}'", path.string()));
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(fmt::format("series file '{}' is empty", path.string()));
  }
  PowerSeries series;
  series.kind = kind;
  std::string_view header = trim(line);
  if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) {
    header.remove_prefix(3);  // UTF-8 BOM
  }
  const bool in_cents = ends_with_unit(header, "[cts/kWh]");
  series.name = std::string(header.substr(0, header.find(" [")));
  series.values.reserve(grid.step_count());

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view field = trim(line);
    if (field.empty()) continue;
    if (field.find(',') != std::string_view::npos) {
      field = trim(field.substr(0, field.find(',')));
    }
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
      throw ValidationError(fmt::format("{}:{}: cannot parse '{}' as a number",
                                        path.string(), line_no, field));
    }
    series.values.push_back(in_cents ? v / 100.0 : v);
  }
  validate_series(series, grid);
  return series;
}

void write_series(const std::filesystem::path& path, const PowerSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError(fmt::format("cannot write series file '{}'", path.string()));
  }
  const bool price = series.kind == SeriesKind::kImportPrice ||
                     series.kind == SeriesKind::kExportPrice;
  out << (series.name.empty() ? std::string(to_string(series.kind)) : series.name)
      << (price ? " [CHF/kWh]" : " [kW]") << '\n';
  for (double v : series.values) {
    out << fmt::format("{:.17g}\n", v);
  }
  if (!out) {
    throw IoError(fmt::format("failed writing series file '{}'", path.string()));
  }
}

Date parse_date(std::string_view iso) {
  int y = 0;
  unsigned m = 0, d = 0;
  std::string s(iso);
  char dash1 = 0, dash2 = 0;
  std::istringstream ss(s);
  ss >> y >> dash1 >> m >> dash2 >> d;
  if (!ss || dash1 != '-' || dash2 != '-') {
    throw ValidationError(fmt::format("invalid date '{}', expected YYYY-MM-DD", iso));
  }
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) {
    throw ValidationError(fmt::format("invalid calendar date '{}'", iso));
  }
  return date;
}

std::string format_date(Date date) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()),
                     static_cast<unsigned>(date.month()),
                     static_cast<unsigned>(date.day()));
}

}  // namespace tariffsim
