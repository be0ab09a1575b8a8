#include "tariffsim/grid_metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "tariffsim/error.hpp"

namespace tariffsim {

double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of an empty sample");
  if (!(p > 0.0 && p <= 100.0)) throw ValidationError("percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const double exact = p / 100.0 * static_cast<double>(values.size());
  // Guard against p * n landing a hair above an integer.
  auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

namespace {

DurationCurve duration_curve(std::vector<double> slack_kw, double rating_kw, double step_hours) {
  DurationCurve dc;
  for (double p : slack_kw) {
    if (p < 0.0) {
      ++dc.reverse_steps;
      dc.max_reverse_kw = std::max(dc.max_reverse_kw, -p);
      if (-p > rating_kw) dc.reverse_hours_above_rating += step_hours;
    }
    if (std::abs(p) > rating_kw) dc.hours_above_rating += step_hours;
  }
  std::sort(slack_kw.begin(), slack_kw.end(), std::greater<>());
  dc.sorted_kw = std::move(slack_kw);
  return dc;
}

}  // namespace

GridAggregator::GridAggregator(const Network& net, double step_hours, GridMetricsOptions opts)
    : net_(&net),
      step_hours_(step_hours),
      opts_(opts),
      above_(net.buses.size()),
      below_(net.buses.size()),
      loading_(net.lines.size()) {
  if (!(step_hours > 0.0)) throw ValidationError("step length must be positive");
}

void GridAggregator::add(const PowerFlowResult& r, int iso_week) {
  const std::size_t nb = net_->buses.size();
  if (r.bus_voltage_pu.size() != nb || r.line_current_a.size() != net_->lines.size()) {
    throw ValidationError(fmt::format("power-flow result at step {} does not match the network",
                                      r.step));
  }
  auto& week = weeks_[iso_week];
  if (week.within.empty()) week.within.assign(nb, 0);
  ++week.steps;
  for (std::size_t b = 0; b < nb; ++b) {
    const double v = r.bus_voltage_pu[b];
    if (v > 1.0) {
      above_[b].push_back(v - 1.0);
    } else if (v < 1.0) {
      below_[b].push_back(1.0 - v);
    }
    if (std::abs(v - 1.0) <= opts_.en50160_band + 1e-12) ++week.within[b];
    vmin_ = std::min(vmin_, v);
    vmax_ = std::max(vmax_, v);
  }
  for (std::size_t l = 0; l < net_->lines.size(); ++l) {
    loading_[l].push_back(r.line_current_a[l] / net_->lines[l].max_current_a);
  }
  slack_kw_.push_back(r.slack_power_kw);
  ++steps_;
}

void GridAggregator::merge(const GridAggregator& other) {
  if (other.net_ != net_) throw ValidationError("cannot merge aggregators of different networks");
  auto append = [](std::vector<std::vector<double>>& dst,
                   const std::vector<std::vector<double>>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i].insert(dst[i].end(), src[i].begin(), src[i].end());
    }
  };
  append(above_, other.above_);
  append(below_, other.below_);
  append(loading_, other.loading_);
  slack_kw_.insert(slack_kw_.end(), other.slack_kw_.begin(), other.slack_kw_.end());
  for (const auto& [key, wc] : other.weeks_) {
    auto& mine = weeks_[key];
    if (mine.within.empty()) mine.within.assign(wc.within.size(), 0);
    mine.steps += wc.steps;
    for (std::size_t b = 0; b < wc.within.size(); ++b) mine.within[b] += wc.within[b];
  }
  vmin_ = std::min(vmin_, other.vmin_);
  vmax_ = std::max(vmax_, other.vmax_);
  steps_ += other.steps_;
}

GridReport GridAggregator::finish() const {
  if (steps_ == 0) throw ValidationError("grid metrics need at least one power-flow result");
  GridReport rep;
  rep.min_voltage_pu = vmin_;
  rep.max_voltage_pu = vmax_;
  for (std::size_t b = 0; b < net_->buses.size(); ++b) {
    BusDeviation d;
    d.bus_id = net_->buses[b].id;
    d.steps_above = above_[b].size();
    d.steps_below = below_[b].size();
    if (!above_[b].empty()) d.above = nearest_rank_percentile(above_[b], opts_.percentile);
    if (!below_[b].empty()) d.below = nearest_rank_percentile(below_[b], opts_.percentile);
    rep.voltage.push_back(std::move(d));
  }
  for (std::size_t l = 0; l < net_->lines.size(); ++l) {
    LineLoading ll;
    ll.line_id = net_->lines[l].id;
    ll.percentile = nearest_rank_percentile(loading_[l], opts_.percentile);
    ll.maximum = *std::max_element(loading_[l].begin(), loading_[l].end());
    rep.loading.push_back(std::move(ll));
  }

  rep.duration = duration_curve(slack_kw_, net_->transformer.rated_power_kw, step_hours_);

  auto& en = rep.en50160;
  for (const auto& [key, wc] : weeks_) {
    BusWeek worst;
    worst.iso_week = key;
    worst.steps = wc.steps;
    worst.fraction_within = 2.0;
    for (std::size_t b = 0; b < wc.within.size(); ++b) {
      BusWeek bw;
      bw.iso_week = key;
      bw.bus_id = net_->buses[b].id;
      bw.steps = wc.steps;
      bw.fraction_within = static_cast<double>(wc.within[b]) / static_cast<double>(wc.steps);
      bw.pass = bw.fraction_within >= opts_.en50160_share;
      if (!bw.pass) {
        en.pass = false;
        en.failures.push_back(bw);
      }
      if (bw.fraction_within < worst.fraction_within) worst = bw;
    }
    en.worst_per_week.push_back(worst);
  }
  if (static_cast<double>(steps_) * step_hours_ < 7.0 * 24.0 - 1e-9) {
    en.warning = fmt::format("horizon of {:.4g} h is shorter than a week; EN50160 evaluated on "
                             "the available span",
                             static_cast<double>(steps_) * step_hours_);
  }
  return rep;
}

namespace {

GridAggregator aggregate(const std::vector<PowerFlowResult>& results, const Network& net,
                         double step_hours, const GridMetricsOptions& opts,
                         const TimeGrid* grid) {
  GridAggregator agg(net, step_hours, opts);
  for (const auto& r : results) agg.add(r, grid ? grid->iso_week_of_step(r.step) : 0);
  return agg;
}

}  // namespace

std::vector<BusDeviation> voltage_deviation_stats(const std::vector<PowerFlowResult>& results,
                                                  const Network& net, double percentile) {
  GridMetricsOptions opts;
  opts.percentile = percentile;
  return aggregate(results, net, 1.0, opts, nullptr).finish().voltage;
}

std::vector<LineLoading> line_loading_stats(const std::vector<PowerFlowResult>& results,
                                            const Network& net, double percentile) {
  GridMetricsOptions opts;
  opts.percentile = percentile;
  return aggregate(results, net, 1.0, opts, nullptr).finish().loading;
}

DurationCurve load_duration_curve(const std::vector<PowerFlowResult>& results,
                                  const Transformer& transformer, double step_hours) {
  if (results.empty()) throw ValidationError("duration curve needs at least one result");
  if (!(step_hours > 0.0)) throw ValidationError("step length must be positive");
  std::vector<double> slack;
  for (const auto& r : results) slack.push_back(r.slack_power_kw);
  return duration_curve(std::move(slack), transformer.rated_power_kw, step_hours);
}

En50160Result en50160_check(const std::vector<PowerFlowResult>& results, const TimeGrid& grid,
                            const Network& net, const GridMetricsOptions& opts) {
  return aggregate(results, net, grid.step_hours(), opts, &grid).finish().en50160;
}

GridReport compute_grid_report(const std::vector<PowerFlowResult>& results, const TimeGrid& grid,
                               const Network& net, const GridMetricsOptions& opts) {
  return aggregate(results, net, grid.step_hours(), opts, &grid).finish();
}

}  // namespace tariffsim
