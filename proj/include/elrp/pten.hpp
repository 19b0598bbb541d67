#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elrp/instance.hpp"

namespace elrp {

/// Node of the partially time-expanded network.
///
/// Customers keep their base node. Every candidate station is replaced by a
/// grid of dummy nodes, one per (feasible time slot, port); `time` and `port`
/// are the trackers of that grid and are -1 on non-dummy nodes.
struct PtenNode {
  NodeKind kind = NodeKind::Depot;
  int customer = -1;  // customer index for Customer nodes
  int station = -1;   // station index for StationDummy nodes
  int time = -1;
  int port = -1;  // 1-based
  std::string name;
};

struct PtenArc {
  int from = 0;
  int to = 0;
  bool internal = false;
  double distance = 0.0;
  int travel_time = 0;
  int station = -1;  // internal arcs only
  int time = -1;     // internal arcs: start slot
};

class PtenGraph {
 public:
  PtenGraph(std::shared_ptr<const Instance> instance, std::vector<PtenNode> nodes, std::vector<PtenArc> arcs);

  [[nodiscard]] const Instance& instance() const { return *instance_; }
  [[nodiscard]] const std::shared_ptr<const Instance>& instance_ptr() const { return instance_; }

  [[nodiscard]] std::span<const PtenNode> nodes() const { return nodes_; }
  [[nodiscard]] std::span<const PtenArc> arcs() const { return arcs_; }
  [[nodiscard]] const PtenNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  [[nodiscard]] const PtenArc& arc(int id) const { return arcs_[static_cast<std::size_t>(id)]; }
  [[nodiscard]] int num_nodes() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] int num_arcs() const { return static_cast<int>(arcs_.size()); }

  [[nodiscard]] int depot() const { return depot_; }
  [[nodiscard]] int sink() const { return sink_; }
  [[nodiscard]] int customer_node(int customer) const { return customer_nodes_[static_cast<std::size_t>(customer)]; }
  [[nodiscard]] std::optional<int> dummy(int station, int time, int port) const;
  [[nodiscard]] std::optional<int> find_node(std::string_view name) const;

  /// Outgoing arc ids of `node`, in construction order.
  [[nodiscard]] std::span<const int> out_arcs(int node) const;
  [[nodiscard]] std::optional<int> find_arc(int from, int to) const;

  /// All internal (charging) arc ids of a station.
  [[nodiscard]] std::span<const int> internal_arcs(int station) const {
    return internal_by_station_[static_cast<std::size_t>(station)];
  }
  [[nodiscard]] int num_dummies(int station) const;
  /// Whether a charging arc starting at slot `t` exists at `station`.
  [[nodiscard]] bool has_charging_slot(int station, int t) const;

 private:
  std::shared_ptr<const Instance> instance_;
  std::vector<PtenNode> nodes_;
  std::vector<PtenArc> arcs_;
  std::vector<int> out_begin_;
  std::vector<int> out_list_;
  int depot_ = -1;
  int sink_ = -1;
  std::vector<int> customer_nodes_;
  // dummy_index_[station][port-1][time] -> node id or -1
  std::vector<std::vector<std::vector<int>>> dummy_index_;
  std::vector<std::vector<int>> internal_by_station_;
};

/// Builds the partially time-expanded network. Throws CapacityError when a
/// candidate station cannot host a single port.
[[nodiscard]] PtenGraph expand(std::shared_ptr<const Instance> instance);

/// Internal arcs of `station` starting at slot `t`. Throws UnknownStation.
[[nodiscard]] std::vector<int> arcs_at(const PtenGraph& graph, std::string_view station, int t);

/// Energy delivered by `count` traversed charging arcs: rated_power * dt * count.
[[nodiscard]] constexpr double charged_energy(int count, double rated_power_kw, double dt_hours) {
  return rated_power_kw * dt_hours * static_cast<double>(count);
}

/// Line-oriented listing of nodes and arcs.
[[nodiscard]] std::string dump_graph(const PtenGraph& graph);

}  // namespace elrp
