#include "tariffsim/synth.hpp"

#include <fmt/format.h>

#include <cmath>
#include <json.hpp>
#include <numbers>
#include <random>

#include "report_io.hpp"
#include "tariffsim/error.hpp"
#include "tariffsim/network.hpp"
#include "tariffsim/scenario.hpp"

namespace tariffsim {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Uniform draw in [lo, hi) from the raw engine output so fixtures do not
// depend on the standard library's distribution implementation.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double operator()(double lo, double hi) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 rng_;
};

double round_to(double v, double digits) {
  const double s = std::pow(10.0, digits);
  return std::round(v * s) / s;
}

std::string series_csv(std::string_view header, const std::vector<double>& values, int digits) {
  std::string s = std::string(header) + "\n";
  for (double v : values) s += fmt::format("{:.{}f}\n", v, digits);
  return s;
}

// Clear-sky bell between sunrise and sunset scaled by a daily cloud factor,
// averaged over the step. kW per module of `peak_kw`.
double pv_unit_kw(double hour, double step_h, double peak_kw, double shift_h, double cloud) {
  constexpr double kSunrise = 5.5;
  constexpr double kSunset = 21.5;
  constexpr int kSub = 4;
  double acc = 0.0;
  for (int k = 0; k < kSub; ++k) {
    const double h = hour + (k + 0.5) * step_h / kSub - shift_h;
    if (h > kSunrise && h < kSunset) {
      const double x = (h - kSunrise) / (kSunset - kSunrise);
      acc += std::pow(std::sin(std::numbers::pi * x), 1.5);
    }
  }
  return 0.7 * peak_kw * cloud * acc / kSub;
}

// Residential shape: night base, morning and evening peaks.
double load_shape(double hour, bool weekend) {
  auto bump = [](double h, double mu, double sigma) {
    return std::exp(-0.5 * (h - mu) * (h - mu) / (sigma * sigma));
  };
  const double morning = weekend ? bump(hour, 9.5, 1.8) : bump(hour, 7.0, 1.0);
  const double cooking = hour >= 18.0 && hour < 19.0 ? 2.5 : 0.0;
  return 0.35 + 0.9 * morning + 1.4 * bump(hour, 19.0, 1.8) + cooking +
         (weekend ? 0.4 * bump(hour, 13.0, 2.0) : 0.0);
}

ordered_json scenario_doc(const std::string& name, const std::string& mode, const std::string& tariff) {
  ordered_json doc;
  doc["schema"] = kScenarioSchema;
  doc["name"] = name;
  doc["mode"] = mode;
  doc["tariff"] = tariff;
  doc["data_dir"] = "../data";
  doc["network"] = "../network.json";
  doc["output_dir"] = "../out/" + name;
  return doc;
}

}  // namespace

std::vector<std::string> synthetic_scenario_names() {
  std::vector<std::string> names = library_tariff_names();
  names.emplace_back("load-only");
  names.emplace_back("full-pv");
  return names;
}

std::vector<fs::path> write_synthetic_fixture(const fs::path& dir, const SynthOptions& opts) {
  if (opts.buildings < 1) throw ValidationError("synth: buildings must be >= 1");
  if (opts.days < 1) throw ValidationError("synth: days must be >= 1");
  if (opts.step_seconds <= 0 || 86400 % opts.step_seconds != 0) {
    throw ValidationError("synth: step_seconds must divide one day");
  }
  const std::size_t per_day = static_cast<std::size_t>(86400 / opts.step_seconds);
  const std::size_t steps = per_day * static_cast<std::size_t>(opts.days);
  const TimeGrid grid(opts.step_seconds, steps, opts.start);
  const double step_h = grid.step_hours();
  Draw draw(opts.seed);

  std::vector<double> cloud(static_cast<std::size_t>(opts.days));
  for (auto& c : cloud) c = draw(0.6, 1.0);

  const fs::path data = dir / "data";
  ordered_json index;
  index["schema"] = kFleetSchema;
  index["step_seconds"] = opts.step_seconds;
  index["start"] = format_date(opts.start);
  index["steps"] = steps;
  index["market_price"] = "spot.csv";

  // Day-ahead shape in cts/kWh with a midday dip below zero on some days.
  std::vector<double> spot(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const double h = grid.hour_of_day(t);
    const std::size_t day = t / per_day;
    double p = 9.0 + 3.5 * std::cos((h - 19.0) / 24.0 * 2.0 * std::numbers::pi) + draw(-0.8, 0.8);
    if (day % 3 == 1 && h >= 12.0 && h < 15.0) p = -draw(0.5, 3.0);
    spot[t] = round_to(p, 2);
  }
  detail::write_text_file(data / "spot.csv", series_csv("spot [cts/kWh]", spot, 2));

  std::vector<std::string> ids;
  ordered_json buildings = ordered_json::array();
  for (int b = 0; b < opts.buildings; ++b) {
    const std::string id = fmt::format("H{:02d}", b + 1);
    ids.push_back(id);
    const double scale = draw(0.5, 1.3);
    std::vector<double> load(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      const auto wd = std::chrono::weekday{std::chrono::sys_days{grid.date_of_step(t)}};
      const bool weekend = wd == std::chrono::Saturday || wd == std::chrono::Sunday;
      load[t] = round_to(scale * load_shape(grid.hour_of_day(t) + step_h / 2, weekend) * draw(0.85, 1.15), 4);
    }
    const std::string load_file = fmt::format("load_{}.csv", id);
    detail::write_text_file(data / load_file, series_csv("load [kW]", load, 4));

    ordered_json pv = ordered_json::array();
    const int configs = b % 3 == 2 ? 2 : 1;
    // Alternate large open roofs with small ones.
    const bool large_roof = b % 2 == 0;
    for (int k = 0; k < configs; ++k) {
      // Second roof faces west: later and lower peak.
      const double shift = k == 0 ? draw(-0.5, 0.5) : 1.5;
      const double derate = k == 0 ? 1.0 : 0.85;
      std::vector<double> gen(steps);
      for (std::size_t t = 0; t < steps; ++t) {
        gen[t] = round_to(pv_unit_kw(grid.hour_of_day(t), step_h, 0.315 * derate, shift,
                                     cloud[t / per_day]), 5);
      }
      const std::string gen_file = fmt::format("pv_{}_{}.csv", id, k + 1);
      detail::write_text_file(data / gen_file, series_csv("pv unit [kW]", gen, 5));
      ordered_json cfg;
      cfg["index"] = k + 1;
      cfg["generation"] = gen_file;
      cfg["max_modules"] = static_cast<int>(std::round(large_roof ? draw(40.0, 90.0) : draw(8.0, 20.0))) / configs;
      cfg["unit_nominal_kw"] = 0.315;
      cfg["unit_cost_chf_per_w"] = 1.05;
      pv.push_back(cfg);
    }
    ordered_json jb;
    jb["id"] = id;
    jb["load"] = load_file;
    jb["pv"] = pv;
    buildings.push_back(jb);
  }
  index["buildings"] = buildings;
  detail::write_text_file(data / "buildings.json", index.dump(2) + "\n");
  detail::write_text_file(dir / "network.json", network_to_json(make_five_bus_feeder(ids)));

  std::vector<fs::path> files;
  for (const auto& name : library_tariff_names()) {
    const fs::path p = dir / "scenarios" / (name + ".json");
    detail::write_text_file(p, scenario_doc(name, "optimize", name).dump(2) + "\n");
    files.push_back(p);
  }
  for (const std::string mode : {"load-only", "full-pv"}) {
    const fs::path p = dir / "scenarios" / (mode + ".json");
    detail::write_text_file(p, scenario_doc(mode, mode, "reference").dump(2) + "\n");
    files.push_back(p);
  }
  return files;
}

}  // namespace tariffsim
