#include "tariffsim/tariff.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "tariffsim/error.hpp"

namespace tariffsim {

std::vector<double> make_block_offsets(std::span<const double> slopes,
                                       std::span<const double> breakpoints,
                                       double step_hours) {
  if (slopes.empty()) throw ValidationError("block tariff needs at least one block");
  if (breakpoints.size() + 1 != slopes.size()) {
    throw ValidationError(fmt::format("{} slopes need {} breakpoints, got {}", slopes.size(),
                                      slopes.size() - 1, breakpoints.size()));
  }
  double prev = 0.0;
  for (double p : breakpoints) {
    if (!(p > prev)) {
      throw ValidationError("block breakpoints must be positive and strictly increasing");
    }
    prev = p;
  }
  std::vector<double> offsets(slopes.size(), 0.0);
  for (std::size_t k = 0; k + 1 < slopes.size(); ++k) {
    offsets[k + 1] = offsets[k] + breakpoints[k] * (slopes[k] - slopes[k + 1]) * step_hours;
  }
  return offsets;
}

BlockRateTariff::BlockRateTariff(std::vector<PowerBlock> blocks, double step_hours)
    : blocks_(std::move(blocks)), step_hours_(step_hours) {
  if (blocks_.empty()) throw ValidationError("block tariff needs at least one block");
  if (!(step_hours > 0.0)) throw ValidationError("step length must be positive");
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto& b = blocks_[k];
    if (!std::isfinite(b.import_slope) || !std::isfinite(b.export_slope) ||
        !std::isfinite(b.upper_kw)) {
      throw ValidationError("block tariff coefficients must be finite");
    }
    if (k > 0) {
      const auto& a = blocks_[k - 1];
      if (!(b.upper_kw > a.upper_kw)) {
        throw ValidationError("block upper bounds must be strictly increasing");
      }
      if (!(b.import_slope > a.import_slope)) {
        throw ValidationError("block import slopes must be strictly increasing");
      }
      if (!(b.export_slope < a.export_slope)) {
        throw ValidationError("block export slopes must be strictly decreasing");
      }
    }
    import_slopes_.push_back(b.import_slope);
    export_slopes_.push_back(b.export_slope);
    if (k + 1 < blocks_.size()) breakpoints_.push_back(b.upper_kw);
  }
  import_offsets_ = make_block_offsets(import_slopes_, breakpoints_, step_hours_);
  export_offsets_ = make_block_offsets(export_slopes_, breakpoints_, step_hours_);
}

double block_rate_step_cost(const BlockRateTariff& tariff, double import_kw,
                            double export_kw) {
  double cost = -std::numeric_limits<double>::infinity();
  double revenue = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < tariff.block_count(); ++k) {
    cost = std::max(cost, tariff.import_segment(k, import_kw));
    revenue = std::min(revenue, tariff.export_segment(k, export_kw));
  }
  return cost - revenue;
}

void validate_tariff(const TariffScenario& scenario, const TimeGrid& grid) {
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, VolumetricTariff>) {
          if (t.import_price.size() != grid.step_count() ||
              t.export_price.size() != grid.step_count()) {
            throw ValidationError(fmt::format(
                "tariff '{}': price series length does not match {} steps", scenario.name,
                grid.step_count()));
          }
          for (std::size_t i = 0; i < grid.step_count(); ++i) {
            if (!std::isfinite(t.import_price[i]) || !std::isfinite(t.export_price[i])) {
              throw ValidationError(
                  fmt::format("tariff '{}': non-finite price at step {}", scenario.name, i));
            }
          }
        } else if constexpr (std::is_same_v<T, CapacityTariff>) {
          if (!(t.demand_charge >= 0.0)) {
            throw ValidationError(
                fmt::format("tariff '{}': demand charge must be >= 0", scenario.name));
          }
        } else {
          if (std::abs(t.step_hours() - grid.step_hours()) > 1e-12) {
            throw ValidationError(fmt::format(
                "tariff '{}': block offsets built for {} h steps, grid uses {} h",
                scenario.name, t.step_hours(), grid.step_hours()));
          }
        }
      },
      scenario.structure);
}

double grid_exchange_cost(const TariffScenario& scenario, std::span<const double> imports,
                          std::span<const double> exports, const TimeGrid& grid) {
  const std::size_t n = grid.step_count();
  if (imports.size() != n || exports.size() != n) {
    throw ValidationError(fmt::format("exchange profiles have {}/{} steps, grid has {}",
                                      imports.size(), exports.size(), n));
  }
  validate_tariff(scenario, grid);
  const double ts = grid.step_hours();
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        double cost = 0.0;
        if constexpr (std::is_same_v<T, VolumetricTariff>) {
          for (std::size_t i = 0; i < n; ++i) {
            cost += (imports[i] * t.import_price[i] - exports[i] * t.export_price[i]) * ts;
          }
        } else if constexpr (std::is_same_v<T, CapacityTariff>) {
          for (std::size_t i = 0; i < n; ++i) {
            cost += (imports[i] * t.import_price - exports[i] * t.export_price) * ts;
          }
          for (const auto& m : grid.months()) {
            double peak = 0.0;
            for (std::size_t i = m.first; i < m.last; ++i) {
              peak = std::max(peak, imports[i]);
              if (t.peak_includes_export) peak = std::max(peak, exports[i]);
            }
            cost += peak * t.demand_charge * m.covered_fraction;
          }
        } else {
          for (std::size_t i = 0; i < n; ++i) {
            cost += block_rate_step_cost(t, imports[i], exports[i]);
          }
        }
        return cost;
      },
      scenario.structure);
}

double import_price_at(const TariffScenario& scenario, std::size_t step) {
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, VolumetricTariff>) {
          return t.import_price[step];
        } else if constexpr (std::is_same_v<T, CapacityTariff>) {
          return t.import_price;
        } else {
          return t.import_slopes().front();
        }
      },
      scenario.structure);
}

double export_price_at(const TariffScenario& scenario, std::size_t step) {
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, VolumetricTariff>) {
          return t.export_price[step];
        } else if constexpr (std::is_same_v<T, CapacityTariff>) {
          return t.export_price;
        } else {
          return t.export_slopes().front();
        }
      },
      scenario.structure);
}

TariffScenario make_flat_tariff(std::string name, const TimeGrid& grid, double import_chf,
                                double export_chf) {
  VolumetricTariff v;
  v.import_price.assign(grid.step_count(), import_chf);
  v.export_price.assign(grid.step_count(), export_chf);
  return TariffScenario{std::move(name), std::move(v)};
}

TariffScenario make_time_of_use_tariff(std::string name, const TimeGrid& grid,
                                       double import_chf, double export_chf,
                                       std::span<const PriceWindow> windows) {
  VolumetricTariff v;
  v.import_price.assign(grid.step_count(), import_chf);
  v.export_price.assign(grid.step_count(), export_chf);
  for (std::size_t i = 0; i < grid.step_count(); ++i) {
    const double h = grid.hour_of_day(i);
    for (const auto& w : windows) {
      if (h >= w.from_hour && h < w.to_hour) {
        v.import_price[i] = w.import_chf;
        v.export_price[i] = w.export_chf;
        break;
      }
    }
  }
  return TariffScenario{std::move(name), std::move(v)};
}

TariffScenario make_indexed_tariff(std::string name, std::span<const double> market,
                                   double import_factor, double export_factor) {
  VolumetricTariff v;
  v.import_price.reserve(market.size());
  v.export_price.reserve(market.size());
  for (double p : market) {
    v.import_price.push_back(p * import_factor);
    v.export_price.push_back(p * export_factor);
  }
  return TariffScenario{std::move(name), std::move(v)};
}

}  // namespace tariffsim
