#include "report_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <numeric>

#include "tariffsim/error.hpp"

namespace tariffsim::detail {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{}", v);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  out.close();
  if (!out) throw IoError(fmt::format("error while writing '{}'", path.string()));
}

std::string buildings_csv(const std::vector<BuildingReport>& reports,
                          const std::vector<BuildingDesign>& designs) {
  std::string s =
      "building_id,pv_modules,pv_capacity_kw,battery_capacity_kwh,annual_load_kwh,"
      "annual_cost_chf,pv_host,pv_penetration,bat_auto_days,pv_cur,self_sufficiency,"
      "gu_import,gu_export,npv_chf,dpp_years,lcoe_chf_per_kwh\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const auto& d = designs[i];
    const int modules = std::accumulate(d.modules_per_config.begin(), d.modules_per_config.end(), 0);
    s += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.building_id, modules,
                     format_number(r.pv_capacity_kw), format_number(r.battery_capacity_kwh),
                     format_number(r.annual_load_kwh), format_number(r.annual_cost),
                     format_number(r.pv_host), format_optional(r.pv_penetration),
                     format_optional(r.bat_auto), format_number(r.pv_cur),
                     format_optional(r.self_sufficiency), format_optional(r.gu_import),
                     format_optional(r.gu_export), format_number(r.npv),
                     r.dpp ? std::to_string(*r.dpp) : std::string(), format_optional(r.lcoe));
  }
  return s;
}

std::string fleet_csv(const std::vector<MetricPercentiles>& fleet) {
  std::string s = "metric,count,p25,p50,p75\n";
  for (const auto& m : fleet) {
    s += fmt::format("{},{},{},{},{}\n", m.metric, m.count, format_optional(m.p25),
                     format_optional(m.p50), format_optional(m.p75));
  }
  return s;
}

std::string grid_voltage_csv(const GridReport& report) {
  std::string s = "bus,steps_above,p95_above_pu,steps_below,p95_below_pu\n";
  for (const auto& b : report.voltage) {
    s += fmt::format("{},{},{},{},{}\n", b.bus_id, b.steps_above, format_optional(b.above),
                     b.steps_below, format_optional(b.below));
  }
  return s;
}

std::string grid_lines_csv(const GridReport& report) {
  std::string s = "line,p95_loading,max_loading\n";
  for (const auto& l : report.loading) {
    s += fmt::format("{},{},{}\n", l.line_id, format_number(l.percentile),
                     format_number(l.maximum));
  }
  return s;
}

std::string duration_curve_csv(const GridReport& report, double step_hours) {
  std::string s = "rank,hours,slack_power_kw\n";
  const auto& c = report.duration.sorted_kw;
  for (std::size_t i = 0; i < c.size(); ++i) {
    s += fmt::format("{},{},{}\n", i + 1, format_number(static_cast<double>(i + 1) * step_hours),
                     format_number(c[i]));
  }
  return s;
}

std::string en50160_csv(const GridReport& report) {
  std::string s = "iso_week,worst_bus,steps,fraction_within,pass\n";
  for (const auto& w : report.en50160.worst_per_week) {
    s += fmt::format("{},{},{},{},{}\n", w.iso_week, w.bus_id, w.steps,
                     format_number(w.fraction_within), w.pass ? 1 : 0);
  }
  return s;
}

std::string pf_bus_csv(const std::vector<PowerFlowResult>& results, const Network& net) {
  std::string s = "step,bus,v_pu,angle_rad\n";
  for (const auto& r : results) {
    for (std::size_t b = 0; b < net.buses.size(); ++b) {
      s += fmt::format("{},{},{},{}\n", r.step, net.buses[b].id,
                       format_number(r.bus_voltage_pu[b]), format_number(r.bus_angle_rad[b]));
    }
  }
  return s;
}

std::string pf_line_csv(const std::vector<PowerFlowResult>& results, const Network& net) {
  std::string s = "step,line,current_a,loading\n";
  for (const auto& r : results) {
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      s += fmt::format("{},{},{},{}\n", r.step, net.lines[l].id,
                       format_number(r.line_current_a[l]),
                       format_number(r.line_current_a[l] / net.lines[l].max_current_a));
    }
  }
  return s;
}

namespace {

constexpr double kW = 640.0;
constexpr double kH = 360.0;
constexpr double kPad = 48.0;

std::string svg_open(std::string_view title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"20\" font-size=\"14\">{}</text>\n",
      kW, kH, kPad, title);
}

std::string axis(double lo, double hi, std::string_view ylabel) {
  return fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{2}\" x2=\"{3}\" y2=\"{2}\" stroke=\"black\"/>\n"
      "<text x=\"4\" y=\"{1}\">{4:.4g}</text>\n"
      "<text x=\"4\" y=\"{2}\">{5:.4g}</text>\n"
      "<text x=\"4\" y=\"{6}\">{7}</text>\n",
      kPad, kPad, kH - kPad, kW - kPad / 2, hi, lo, kH / 2, ylabel);
}

}  // namespace

std::string duration_curve_svg(const GridReport& report, double rating_kw, double step_hours) {
  const auto& c = report.duration.sorted_kw;
  double lo = std::min({0.0, -rating_kw, c.empty() ? 0.0 : c.back()});
  double hi = std::max({0.0, rating_kw, c.empty() ? 0.0 : c.front()});
  if (hi == lo) hi = lo + 1.0;
  auto y = [&](double v) { return kH - kPad - (v - lo) / (hi - lo) * (kH - 2 * kPad); };
  const double span = std::max<double>(1.0, static_cast<double>(c.size()));
  std::string s = svg_open("Load duration curve at the transformer");
  s += axis(lo, hi, "kW");
  std::string pts;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double x = kPad + static_cast<double>(i) / span * (kW - 1.5 * kPad);
    pts += fmt::format("{:.2f},{:.2f} ", x, y(c[i]));
  }
  s += fmt::format("<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                   pts);
  for (double r : {rating_kw, -rating_kw, 0.0}) {
    s += fmt::format(
        "<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-dasharray=\"4 3\"/>\n",
        kPad, y(r), kW - kPad / 2, y(r), r == 0.0 ? "gray" : "firebrick");
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\">{:.4g} h</text>\n", kW - 2 * kPad, kH - kPad / 3,
                   static_cast<double>(c.size()) * step_hours);
  s += "</svg>\n";
  return s;
}

std::string line_loading_svg(const GridReport& report) {
  double hi = 1.0;
  for (const auto& l : report.loading) hi = std::max(hi, l.percentile);
  std::string s = svg_open("95th percentile line loading");
  s += axis(0.0, hi, "I/Imax");
  const double n = std::max<double>(1.0, static_cast<double>(report.loading.size()));
  const double slot = (kW - 1.5 * kPad) / n;
  for (std::size_t i = 0; i < report.loading.size(); ++i) {
    const double h = report.loading[i].percentile / hi * (kH - 2 * kPad);
    const double x = kPad + slot * static_cast<double>(i) + slot * 0.15;
    s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"steelblue\"/>\n",
                     x, kH - kPad - h, slot * 0.7, h);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{}\">{}</text>\n", x, kH - kPad + 14,
                     report.loading[i].line_id);
  }
  s += "</svg>\n";
  return s;
}

std::string voltage_deviation_svg(const GridReport& report) {
  double hi = 0.01;
  for (const auto& b : report.voltage) {
    hi = std::max({hi, b.above.value_or(0.0), b.below.value_or(0.0)});
  }
  std::string s = svg_open("95th percentile voltage deviation (up: above 1 p.u, down: below)");
  const double mid = kH / 2;
  const double scale = (kH / 2 - kPad) / hi;
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kPad,
                   mid, kW - kPad / 2);
  s += fmt::format("<text x=\"4\" y=\"{}\">+{:.3g}</text>\n<text x=\"4\" y=\"{}\">-{:.3g}</text>\n",
                   kPad, hi, kH - kPad, hi);
  const double n = std::max<double>(1.0, static_cast<double>(report.voltage.size()));
  const double slot = (kW - 1.5 * kPad) / n;
  for (std::size_t i = 0; i < report.voltage.size(); ++i) {
    const auto& b = report.voltage[i];
    const double x = kPad + slot * static_cast<double>(i) + slot * 0.15;
    if (b.above) {
      s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"firebrick\"/>\n",
                       x, mid - *b.above * scale, slot * 0.7, *b.above * scale);
    }
    if (b.below) {
      s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"steelblue\"/>\n",
                       x, mid, slot * 0.7, *b.below * scale);
    }
    s += fmt::format("<text x=\"{:.2f}\" y=\"{}\">{}</text>\n", x, kH - 8, b.bus_id);
  }
  s += "</svg>\n";
  return s;
}

}  // namespace tariffsim::detail
