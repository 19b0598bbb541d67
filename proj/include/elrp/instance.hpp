#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "elrp/money.hpp"

namespace elrp {

enum class NodeKind { Depot, DepotSink, Customer, StationCandidate, StationDummy };

[[nodiscard]] const char* to_string(NodeKind kind);

struct Customer {
  std::string id;
  double demand = 0.0;  // kg
  int window_early = 0;
  int window_late = 0;
  int service_time = 0;

  friend bool operator==(const Customer&, const Customer&) = default;
};

struct StationCandidate {
  std::string id;
  std::vector<double> grid_capacity;      // kW available per time step
  double rated_power = 0.0;               // kW per port
  double port_cost = 0.0;                 // money per port
  double upgrade_cost = 0.0;              // money per kW of transformer upgrade
  std::vector<double> electricity_price;  // money per kWh per time step
  int size_min = 0;
  int size_max = 0;
  std::vector<int> slots;  // feasible visiting time steps, sorted; empty in a file means "all"

  [[nodiscard]] int feasible_slots() const { return static_cast<int>(slots.size()); }
  [[nodiscard]] double min_grid_capacity() const;

  friend bool operator==(const StationCandidate&, const StationCandidate&) = default;
};

struct VehicleType {
  int id = 0;
  double freight_capacity = 0.0;  // kg
  double battery_capacity = 0.0;  // kWh
  double consumption_rate = 0.0;  // kWh per unit length
  double purchase_cost = 0.0;     // money
  double travel_cost_per_length = 0.0;

  friend bool operator==(const VehicleType&, const VehicleType&) = default;
};

struct Economics {
  double discount_rate = 0.05;
  int station_life_years = 10;
  int vehicle_life_years = 10;
  std::vector<double> service_fee;  // money per kWh, one entry per station
  double time_step_hours = 1.0;
  int horizon = 1;
  // Duty cycles per year. Travel and energy terms are scaled by this factor so
  // that they are on the same annual basis as the annualized capital terms.
  double operating_days = 1.0;
  std::optional<double> max_route_length;

  friend bool operator==(const Economics&, const Economics&) = default;
};

struct Edge {
  std::string from;
  std::string to;
  double distance = 0.0;
  int travel_time = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Plain, unvalidated description of an instance. `Instance` wraps a validated copy.
struct InstanceData {
  std::string name;
  std::string description;
  std::string depot_id = "D0";
  std::vector<Customer> customers;
  std::vector<StationCandidate> stations;
  std::vector<VehicleType> vehicle_types;
  std::vector<Edge> edges;
  Economics economics;

  friend bool operator==(const InstanceData&, const InstanceData&) = default;
};

/// Index of a node in the un-expanded graph: depot first, then customers, then stations.
struct BaseGraphIndex {
  int depot = 0;
  int first_customer = 1;
  int first_station = 1;
  int size = 1;
};

struct EdgeData {
  double distance = 0.0;
  int travel_time = 0;
};

/// Immutable, validated problem description.
class Instance {
 public:
  explicit Instance(InstanceData data);

  [[nodiscard]] const InstanceData& data() const { return data_; }
  [[nodiscard]] const std::string& name() const { return data_.name; }
  [[nodiscard]] const std::vector<Customer>& customers() const { return data_.customers; }
  [[nodiscard]] const std::vector<StationCandidate>& stations() const { return data_.stations; }
  [[nodiscard]] const std::vector<VehicleType>& vehicle_types() const { return data_.vehicle_types; }
  [[nodiscard]] const Economics& economics() const { return data_.economics; }
  [[nodiscard]] int horizon() const { return data_.economics.horizon; }
  [[nodiscard]] int num_customers() const { return static_cast<int>(data_.customers.size()); }
  [[nodiscard]] int num_stations() const { return static_cast<int>(data_.stations.size()); }
  [[nodiscard]] int num_vehicle_types() const { return static_cast<int>(data_.vehicle_types.size()); }

  [[nodiscard]] const BaseGraphIndex& base_index() const { return index_; }
  [[nodiscard]] int customer_base(int c) const { return index_.first_customer + c; }
  [[nodiscard]] int station_base(int s) const { return index_.first_station + s; }
  /// Declared edge between two base nodes, if any.
  [[nodiscard]] const std::optional<EdgeData>& edge(int a, int b) const {
    return edges_[static_cast<std::size_t>(a * index_.size + b)];
  }
  [[nodiscard]] std::optional<int> station_index(const std::string& id) const;
  [[nodiscard]] std::optional<int> customer_index(const std::string& id) const;
  [[nodiscard]] const std::string& base_name(int base) const;

  [[nodiscard]] double station_life_factor() const { return station_crf_; }
  [[nodiscard]] double vehicle_life_factor() const { return vehicle_crf_; }

  friend bool operator==(const Instance& a, const Instance& b) { return a.data_ == b.data_; }

 private:
  InstanceData data_;
  BaseGraphIndex index_;
  std::vector<std::optional<EdgeData>> edges_;
  std::vector<std::string> base_names_;
  double station_crf_ = 0.0;
  double vehicle_crf_ = 0.0;
};

/// Scenario knobs that experiments may change on a base instance.
struct InstancePatch {
  std::optional<std::vector<double>> service_fee;
  std::map<std::string, std::pair<int, int>> windows;
  std::map<std::string, double> rated_power;
  std::map<std::string, double> port_cost;

  [[nodiscard]] bool empty() const {
    return !service_fee && windows.empty() && rated_power.empty() && port_cost.empty();
  }
  static InstancePatch uniform_fee(const Instance& base, double fee);
};

/// r(1+r)^Y / ((1+r)^Y - 1). Throws DomainError unless rate > 0 and years >= 1.
[[nodiscard]] double capital_recovery_factor(double rate, int years);

[[nodiscard]] Instance load_instance(const std::filesystem::path& path);
[[nodiscard]] Instance parse_instance(const std::string& text);
void save_instance(const Instance& instance, const std::filesystem::path& path);
[[nodiscard]] std::string serialize_instance(const Instance& instance);

/// Applies `patch` to a copy of `base` and re-validates it.
[[nodiscard]] Instance with_overrides(const Instance& base, const InstancePatch& patch);

/// Pairs (i, j, k) where d_ik + d_kj < d_ij over declared edges.
[[nodiscard]] std::vector<std::string> triangle_warnings(const Instance& instance);

}  // namespace elrp
