#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tariffsim/network.hpp"
#include "tariffsim/powerflow.hpp"
#include "tariffsim/timeseries.hpp"

namespace tariffsim {

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest sample.
double nearest_rank_percentile(std::vector<double> values, double p);

struct BusDeviation {
  std::string bus_id;
  std::optional<double> above;  // percentile of v - 1 over steps with v > 1
  std::optional<double> below;  // percentile of 1 - v over steps with v < 1
  std::size_t steps_above = 0;
  std::size_t steps_below = 0;
};

struct LineLoading {
  std::string line_id;
  double percentile = 0.0;  // of I / I_max
  double maximum = 0.0;
};

struct DurationCurve {
  std::vector<double> sorted_kw;  // slack power, non-increasing
  double max_reverse_kw = 0.0;    // largest LV-to-HV flow
  double hours_above_rating = 0.0;  // |P| above the transformer rating, both directions
  double reverse_hours_above_rating = 0.0;
  std::size_t reverse_steps = 0;
};

struct BusWeek {
  int iso_week = 0;  // year * 100 + week
  std::string bus_id;
  std::size_t steps = 0;
  double fraction_within = 1.0;
  bool pass = true;
};

struct En50160Result {
  bool pass = true;
  std::vector<BusWeek> failures;
  // Worst bus of every week, in week order.
  std::vector<BusWeek> worst_per_week;
  std::optional<std::string> warning;
};

struct GridReport {
  std::vector<BusDeviation> voltage;
  std::vector<LineLoading> loading;
  DurationCurve duration;
  En50160Result en50160;
  double min_voltage_pu = 1.0;
  double max_voltage_pu = 1.0;
};

struct GridMetricsOptions {
  double percentile = 95.0;
  double en50160_band = 0.10;
  double en50160_share = 0.95;
};

// Streaming accumulator over power-flow results. Partial aggregators built
// on disjoint chunks of steps merge into the same report as a single pass.
class GridAggregator {
 public:
  GridAggregator(const Network& net, double step_hours, GridMetricsOptions opts = {});

  void add(const PowerFlowResult& result, int iso_week);
  void merge(const GridAggregator& other);
  std::size_t steps() const { return steps_; }

  GridReport finish() const;

 private:
  struct WeekCount {
    std::size_t steps = 0;
    std::vector<std::size_t> within;  // per bus
  };

  const Network* net_;
  double step_hours_;
  GridMetricsOptions opts_;
  std::size_t steps_ = 0;
  std::vector<std::vector<double>> above_;
  std::vector<std::vector<double>> below_;
  std::vector<std::vector<double>> loading_;
  std::vector<double> slack_kw_;
  std::map<int, WeekCount> weeks_;
  double vmin_ = 1.0;
  double vmax_ = 1.0;
};

std::vector<BusDeviation> voltage_deviation_stats(const std::vector<PowerFlowResult>& results,
                                                  const Network& net, double percentile = 95.0);
std::vector<LineLoading> line_loading_stats(const std::vector<PowerFlowResult>& results,
                                            const Network& net, double percentile = 95.0);
DurationCurve load_duration_curve(const std::vector<PowerFlowResult>& results,
                                  const Transformer& transformer, double step_hours);
En50160Result en50160_check(const std::vector<PowerFlowResult>& results, const TimeGrid& grid,
                            const Network& net, const GridMetricsOptions& opts = {});

GridReport compute_grid_report(const std::vector<PowerFlowResult>& results, const TimeGrid& grid,
                               const Network& net, const GridMetricsOptions& opts = {});

}  // namespace tariffsim
