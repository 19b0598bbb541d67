#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "elrp/errors.hpp"
#include "elrp/instance.hpp"
#include "elrp/money.hpp"
#include "elrp/pten.hpp"

namespace elrp {

enum class RouteViolation {
  InvalidRoute,  // malformed sequence, missing arc, repeated customer, no customer served
  TimeWindow,
  Overload,
  EnergyDepletion,
  Overcharge,
  SlotMismatch,
  RouteLength,
  ZeroChargeVisit,  // entered a station dummy and left without charging
};

[[nodiscard]] const char* to_string(RouteViolation v);

class RouteError : public Error {
 public:
  RouteError(RouteViolation kind, const std::string& what) : Error(what), kind_(kind) {}
  [[nodiscard]] RouteViolation kind() const { return kind_; }

 private:
  RouteViolation kind_;
};

/// Per-term money values. Each term is rounded to micro-units once, here, so
/// every module that prices the same arc gets the same integer.
class CostModel {
 public:
  explicit CostModel(const Instance& instance) : instance_(&instance) {}

  /// Annualized purchase cost of one vehicle of type index `k`.
  [[nodiscard]] Money vehicle(int k) const;
  /// Annual travel cost of one traversal of an external arc of length `distance`.
  [[nodiscard]] Money travel(int k, double distance) const;
  /// Annual amount the fleet pays for one charging step at (station, t): energy price plus fee.
  [[nodiscard]] Money charge_payment(int station, int t) const;
  /// Annual service fee the station owner collects for one charging step at (station, t).
  [[nodiscard]] Money charge_revenue(int station, int t) const;
  /// kWh delivered by one charging step at `station`.
  [[nodiscard]] double step_energy(int station) const;

 private:
  const Instance* instance_;
};

struct RouteVisit {
  int node = 0;
  int arrival = 0;  // service start at customers, t(j) at dummies
  double load_after = 0.0;
  double energy_after = 0.0;
};

struct ChargingSession {
  int station = 0;
  int port = 1;
  int start = 0;  // first charging slot
  int end = 0;    // slot at which the vehicle is released; charges over [start, end)
};

struct Route {
  int vehicle_type = 0;  // index into Instance::vehicle_types()
  std::vector<int> nodes;
  std::vector<RouteVisit> visits;
  std::uint64_t covered = 0;  // bit c set when customer c is served
  std::vector<ChargingSession> sessions;
  double distance = 0.0;
  double energy_purchased = 0.0;  // kWh per duty cycle
  Money vehicle_cost;
  Money travel_cost;
  Money charging_cost;  // paid by the fleet operator
  Money fee_revenue;    // collected by the station owner

  /// Fleet-operator cost of the route.
  [[nodiscard]] Money cost() const { return vehicle_cost + travel_cost + charging_cost; }
  /// Station-owner cost attributable to the route (negative revenue).
  [[nodiscard]] Money owner_cost() const { return -fee_revenue; }
  /// Charging steps used per (station, slot), as (station, t) pairs sorted.
  [[nodiscard]] std::vector<std::pair<int, int>> charging_steps() const;
  [[nodiscard]] int num_customers() const;
};

/// Incremental forward simulation of a partial route. Shared by route
/// simulation and the brute-force enumerator.
struct SimState {
  int node = 0;
  int time = 0;  // departure time from `node`
  double delivered = 0.0;
  double energy = 0.0;
  double distance = 0.0;
  std::uint64_t visited = 0;
  bool charged = false;  // at a dummy: at least one charging step taken since arriving
};

class RouteSimulator {
 public:
  RouteSimulator(const PtenGraph& graph, int vehicle_type);

  [[nodiscard]] SimState start() const;
  /// Extends `from` along arc `arc_id`. Returns the violation when infeasible.
  [[nodiscard]] std::optional<RouteViolation> step(const SimState& from, int arc_id, SimState& out) const;

  [[nodiscard]] const PtenGraph& graph() const { return *graph_; }
  [[nodiscard]] int vehicle_type() const { return k_; }

 private:
  const PtenGraph* graph_;
  int k_;
  double capacity_;
  double battery_;
  double rate_;
  std::optional<double> max_length_;
};

/// Simulates a node sequence depot..sink. Throws RouteError.
[[nodiscard]] Route simulate_route(const PtenGraph& graph, int vehicle_type, const std::vector<int>& nodes);
/// Non-throwing variant.
[[nodiscard]] std::optional<Route> try_simulate(const PtenGraph& graph, int vehicle_type, const std::vector<int>& nodes);

/// Station owner's decision. Vectors are indexed by station.
struct LeaderDecision {
  std::vector<int> build;
  std::vector<int> ports;
  std::vector<double> upgrade;  // kW

  /// Decision with the given port counts, built where ports > 0, and the
  /// smallest transformer upgrade that keeps every port at rated power.
  static LeaderDecision with_ports(const Instance& instance, const std::vector<int>& ports);
  static LeaderDecision nothing(const Instance& instance);

  /// Throws ValidationError when the decision breaks the sizing rules.
  void validate(const Instance& instance) const;
  [[nodiscard]] Money capex(const Instance& instance) const;
  [[nodiscard]] int stations_built() const;
  [[nodiscard]] int total_ports() const;

  friend bool operator==(const LeaderDecision&, const LeaderDecision&) = default;
};

struct FleetPlan {
  std::vector<Route> routes;
};

/// Fleet operator objective: vehicles, travel and charging payments.
[[nodiscard]] Money fo_cost(const FleetPlan& plan);
/// Station owner objective: annualized capital cost minus service fee revenue.
[[nodiscard]] Money csp_cost(const Instance& instance, const LeaderDecision& decision, const FleetPlan& plan);
[[nodiscard]] double energy_sold(const FleetPlan& plan);

/// Peak number of simultaneously charging vehicles per station, over arc starts.
[[nodiscard]] std::vector<int> peak_usage(const Instance& instance, const FleetPlan& plan);

/// Re-labels charging ports: every session gets the lowest port free over its
/// whole [start, end) interval. Routes are re-simulated on the new dummies.
/// Throws CapacityError when a station runs out of dummy ports.
[[nodiscard]] FleetPlan assign_ports(const PtenGraph& graph, const FleetPlan& plan);

struct Violation {
  std::string kind;
  std::string station;  // empty when not station specific
  int t = -1;
  std::string customer;
  int route = -1;
  std::string detail;

  [[nodiscard]] std::string to_string() const;
};

/// Checks coverage, single use of every dummy slot, route consistency, port
/// capacity against the decision and charging at built stations only. Never throws.
[[nodiscard]] std::vector<Violation> check_joint_feasibility(const PtenGraph& graph, const LeaderDecision& decision,
                                                             const FleetPlan& plan);

/// Raw arc-flow view of a plan: one row per route, x over PTEN arcs plus the
/// time, energy and load trackers at every node the route touches.
struct EncodedPlan {
  std::vector<int> vehicle_type;
  std::vector<std::vector<int>> x;               // [route][arc] in {0,1}
  std::vector<std::vector<double>> tau;          // [route][node], -1 where unvisited
  std::vector<std::vector<double>> energy;       // [route][node]
  std::vector<std::vector<double>> load;         // [route][node]
};

[[nodiscard]] EncodedPlan encode_plan(const PtenGraph& graph, const FleetPlan& plan);

}  // namespace elrp
