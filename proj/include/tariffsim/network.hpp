#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tariffsim/milp_model.hpp"

namespace tariffsim {

inline constexpr const char* kNetworkSchema = "lvnet/1";

enum class BusKind { kSlack, kLoad };

struct Bus {
  std::string id;
  double nominal_voltage_v = 400.0;
  BusKind kind = BusKind::kLoad;
};

struct Line {
  std::string id;
  std::size_t from = 0;  // bus index
  std::size_t to = 0;
  double resistance_ohm = 0.0;
  double reactance_ohm = 0.0;
  double max_current_a = 0.0;
};

struct Transformer {
  double rated_power_kw = 400.0;
};

struct Network {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  Transformer transformer;
  std::map<std::string, std::size_t> building_to_bus;
  double power_factor = 1.0;  // lagging, applied to every building

  std::size_t slack_bus() const;
  std::optional<std::size_t> find_bus(std::string_view id) const;
};

// Throws ValidationError on duplicate ids, a missing or repeated slack bus,
// unknown line endpoints, bad ratings or a disconnected graph.
void validate_network(const Network& net);

Network parse_network(std::string_view json_text);
Network load_network(const std::filesystem::path& path);
std::string network_to_json(const Network& net);

// Net active power per bus at a step (kW, positive = consumption), indexed
// like net.buses.
std::vector<double> injections_at_buses(const std::vector<BuildingDesign>& designs,
                                        const Network& net, std::size_t step);

// Slack plus a four-bus radial trunk; buildings are spread over the load
// buses in order.
Network make_five_bus_feeder(const std::vector<std::string>& building_ids);

// Random radial feeder with `buses` buses (slack included); each new bus
// hangs off one of the three most recent ones. Reproducible for a seed.
Network make_random_feeder(const std::vector<std::string>& building_ids, int buses,
                           std::uint64_t seed);

}  // namespace tariffsim
