#include "tariffsim/network.hpp"

#include <fmt/format.h>

#include <fstream>
#include <json.hpp>
#include <random>
#include <set>
#include <sstream>

#include "tariffsim/error.hpp"

namespace tariffsim {

using nlohmann::json;

std::size_t Network::slack_bus() const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].kind == BusKind::kSlack) return i;
  }
  throw ValidationError("network has no slack bus");
}

std::optional<std::size_t> Network::find_bus(std::string_view id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  return std::nullopt;
}

void validate_network(const Network& net) {
  if (net.buses.empty()) throw ValidationError("network has no buses");
  std::set<std::string> ids;
  int slacks = 0;
  for (const auto& b : net.buses) {
    if (b.id.empty()) throw ValidationError("bus with empty id");
    if (!ids.insert(b.id).second) throw ValidationError(fmt::format("duplicate bus id '{}'", b.id));
    if (!(b.nominal_voltage_v > 0.0)) {
      throw ValidationError(fmt::format("bus '{}': nominal voltage must be positive", b.id));
    }
    if (b.kind == BusKind::kSlack) ++slacks;
  }
  if (slacks == 0) throw ValidationError("network has no slack bus");
  if (slacks > 1) throw ValidationError(fmt::format("network has {} slack buses", slacks));

  std::set<std::string> line_ids;
  for (const auto& l : net.lines) {
    if (!line_ids.insert(l.id).second) {
      throw ValidationError(fmt::format("duplicate line id '{}'", l.id));
    }
    if (l.from >= net.buses.size() || l.to >= net.buses.size()) {
      throw ValidationError(fmt::format("line '{}': unknown endpoint", l.id));
    }
    if (l.from == l.to) throw ValidationError(fmt::format("line '{}' is a self-loop", l.id));
    if (!(l.resistance_ohm >= 0.0) || !(l.reactance_ohm >= 0.0)) {
      throw ValidationError(fmt::format("line '{}': impedance must be non-negative", l.id));
    }
    if (l.resistance_ohm == 0.0 && l.reactance_ohm == 0.0) {
      throw ValidationError(fmt::format("line '{}': zero impedance", l.id));
    }
    if (!(l.max_current_a > 0.0)) {
      throw ValidationError(fmt::format("line '{}': max current must be positive", l.id));
    }
    if (net.buses[l.from].nominal_voltage_v != net.buses[l.to].nominal_voltage_v) {
      throw ValidationError(
          fmt::format("line '{}' joins buses of different nominal voltage", l.id));
    }
  }
  if (!(net.transformer.rated_power_kw > 0.0)) {
    throw ValidationError("transformer rating must be positive");
  }
  if (!(net.power_factor > 0.0 && net.power_factor <= 1.0)) {
    throw ValidationError("power factor must lie in (0, 1]");
  }
  for (const auto& [building, bus] : net.building_to_bus) {
    if (bus >= net.buses.size()) {
      throw ValidationError(fmt::format("building '{}' mapped to an unknown bus", building));
    }
  }

  // Connectivity from the slack bus.
  std::vector<std::vector<std::size_t>> adj(net.buses.size());
  for (const auto& l : net.lines) {
    adj[l.from].push_back(l.to);
    adj[l.to].push_back(l.from);
  }
  std::vector<bool> seen(net.buses.size(), false);
  std::vector<std::size_t> stack{net.slack_bus()};
  seen[stack.back()] = true;
  while (!stack.empty()) {
    const std::size_t b = stack.back();
    stack.pop_back();
    for (std::size_t nb : adj[b]) {
      if (!seen[nb]) {
        seen[nb] = true;
        stack.push_back(nb);
      }
    }
  }
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    if (!seen[i]) {
      throw ValidationError(
          fmt::format("network is disconnected: bus '{}' unreachable from slack", net.buses[i].id));
    }
  }
}

namespace {

template <typename T>
T required(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) throw ValidationError(fmt::format("{}: missing '{}'", where, key));
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(fmt::format("{}: field '{}' has the wrong type", where, key));
  }
}

}  // namespace

Network parse_network(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("network document is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ValidationError("network document must be an object");
  const auto schema = required<std::string>(doc, "schema", "network");
  if (schema != kNetworkSchema) {
    throw ValidationError(
        fmt::format("unsupported network schema '{}', expected '{}'", schema, kNetworkSchema));
  }

  Network net;
  for (const auto& jb : required<json>(doc, "buses", "network")) {
    Bus b;
    b.id = required<std::string>(jb, "id", "bus");
    b.nominal_voltage_v = jb.value("nominal_voltage_v", 400.0);
    const auto kind = jb.value("kind", std::string("load"));
    if (kind == "slack") {
      b.kind = BusKind::kSlack;
    } else if (kind == "load") {
      b.kind = BusKind::kLoad;
    } else {
      throw ValidationError(fmt::format("bus '{}': unknown kind '{}'", b.id, kind));
    }
    net.buses.push_back(std::move(b));
  }
  auto bus_index = [&](const std::string& id, std::string_view where) {
    auto idx = net.find_bus(id);
    if (!idx) throw ValidationError(fmt::format("{}: unknown bus '{}'", where, id));
    return *idx;
  };
  for (const auto& jl : required<json>(doc, "lines", "network")) {
    Line l;
    l.id = required<std::string>(jl, "id", "line");
    const std::string where = fmt::format("line '{}'", l.id);
    l.from = bus_index(required<std::string>(jl, "from", where), where);
    l.to = bus_index(required<std::string>(jl, "to", where), where);
    l.resistance_ohm = required<double>(jl, "r_ohm", where);
    l.reactance_ohm = required<double>(jl, "x_ohm", where);
    l.max_current_a = required<double>(jl, "max_current_a", where);
    net.lines.push_back(std::move(l));
  }
  if (doc.contains("transformer")) {
    net.transformer.rated_power_kw =
        required<double>(doc["transformer"], "rated_power_kw", "transformer");
  }
  net.power_factor = doc.value("power_factor", 1.0);
  if (doc.contains("building_to_bus")) {
    for (const auto& [building, bus] : doc["building_to_bus"].items()) {
      if (!bus.is_string()) {
        throw ValidationError(fmt::format("building '{}': bus id must be a string", building));
      }
      net.building_to_bus[building] =
          bus_index(bus.get<std::string>(), fmt::format("building '{}'", building));
    }
  }
  validate_network(net);
  return net;
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open network file '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_network(ss.str());
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string network_to_json(const Network& net) {
  json doc;
  doc["schema"] = kNetworkSchema;
  doc["power_factor"] = net.power_factor;
  doc["transformer"] = {{"rated_power_kw", net.transformer.rated_power_kw}};
  json buses = json::array();
  for (const auto& b : net.buses) {
    buses.push_back({{"id", b.id},
                     {"nominal_voltage_v", b.nominal_voltage_v},
                     {"kind", b.kind == BusKind::kSlack ? "slack" : "load"}});
  }
  doc["buses"] = buses;
  json lines = json::array();
  for (const auto& l : net.lines) {
    lines.push_back({{"id", l.id},
                     {"from", net.buses[l.from].id},
                     {"to", net.buses[l.to].id},
                     {"r_ohm", l.resistance_ohm},
                     {"x_ohm", l.reactance_ohm},
                     {"max_current_a", l.max_current_a}});
  }
  doc["lines"] = lines;
  json mapping = json::object();
  for (const auto& [building, bus] : net.building_to_bus) mapping[building] = net.buses[bus].id;
  doc["building_to_bus"] = mapping;
  return doc.dump(2) + "\n";
}

std::vector<double> injections_at_buses(const std::vector<BuildingDesign>& designs,
                                        const Network& net, std::size_t step) {
  std::vector<double> p(net.buses.size(), 0.0);
  for (const auto& d : designs) {
    auto it = net.building_to_bus.find(d.building_id);
    if (it == net.building_to_bus.end()) {
      throw ValidationError(fmt::format("building '{}' is not mapped to a bus", d.building_id));
    }
    if (step >= d.imports.size()) {
      throw ValidationError(
          fmt::format("building '{}': step {} outside its dispatch", d.building_id, step));
    }
    p[it->second] += d.imports[step] - d.exports[step];
  }
  return p;
}

Network make_five_bus_feeder(const std::vector<std::string>& building_ids) {
  Network net;
  net.buses.push_back({"B0", 400.0, BusKind::kSlack});
  for (int i = 1; i <= 4; ++i) net.buses.push_back({fmt::format("B{}", i), 400.0, BusKind::kLoad});
  // 95 mm2 Al cable sections, 0.32 / 0.08 ohm per km.
  const double lengths_km[] = {0.15, 0.12, 0.10, 0.08};
  for (std::size_t i = 0; i < 4; ++i) {
    net.lines.push_back({fmt::format("L{}", i + 1), i, i + 1, 0.32 * lengths_km[i],
                         0.08 * lengths_km[i], 250.0});
  }
  for (std::size_t k = 0; k < building_ids.size(); ++k) {
    net.building_to_bus[building_ids[k]] = 1 + k % 4;
  }
  return net;
}

Network make_random_feeder(const std::vector<std::string>& building_ids, int buses,
                           std::uint64_t seed) {
  if (buses < 2) throw ValidationError("a feeder needs at least two buses");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> length_km(0.03, 0.12);
  Network net;
  net.buses.push_back({"B0", 400.0, BusKind::kSlack});
  for (int i = 1; i < buses; ++i) {
    net.buses.push_back({fmt::format("B{}", i), 400.0, BusKind::kLoad});
    const int lo = std::max(0, i - 3);
    const auto parent = static_cast<std::size_t>(lo + static_cast<int>(rng() % (i - lo)));
    const double len = length_km(rng);
    const double ampacity = parent == 0 ? 400.0 : 250.0;
    net.lines.push_back({fmt::format("L{}", i), parent, static_cast<std::size_t>(i), 0.32 * len,
                         0.08 * len, ampacity});
  }
  for (const auto& id : building_ids) {
    net.building_to_bus[id] = 1 + rng() % static_cast<std::uint64_t>(buses - 1);
  }
  validate_network(net);
  return net;
}

}  // namespace tariffsim
