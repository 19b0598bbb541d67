#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "elrp/evaluate.hpp"
#include "elrp/mathprog.hpp"
#include "elrp/pten.hpp"
#include "elrp/spprc.hpp"

namespace elrp {

/// Routes generated so far, shared by every master built on the same graph.
class ColumnPool {
 public:
  /// Adds a route unless an identical one (same vehicle type and node
  /// sequence up to port labels) is present. The route is re-simulated first.
  bool add(const PtenGraph& graph, const Route& route);
  [[nodiscard]] bool contains(const PtenGraph& graph, const Route& route) const;
  [[nodiscard]] const std::vector<Route>& routes() const { return routes_; }
  [[nodiscard]] std::size_t size() const { return routes_.size(); }

 private:
  static std::string signature(const PtenGraph& graph, const Route& route);
  std::vector<Route> routes_;
  std::unordered_set<std::string> seen_;
};

enum class MasterKind {
  Follower,  // minimize fleet cost
  Leader,    // minimize owner cost subject to a fleet-cost cap
  Joint,     // minimize fleet plus owner cost; the service fee cancels
};

/// One restricted master: which stations are open with how many ports, and
/// the optional fleet-cost cap row.
struct MasterSpec {
  MasterKind kind = MasterKind::Follower;
  std::vector<int> ports;  // per station; 0 means closed
  std::optional<double> fleet_cost_cap;
};

struct DualPrices {
  std::vector<double> cover;              // per customer (gamma for the follower master, lambda for the leader master)
  std::vector<std::vector<double>> slot;  // [station][t], >= 0
  double cap = 0.0;                       // >= 0, fleet-cost cap row
};

/// Master objective coefficient of a route.
[[nodiscard]] double master_cost(const Route& route, MasterKind kind);
/// Follower master reduced cost: c_r - sum of covered gamma (+ slot prices when capacity rows exist).
[[nodiscard]] double reduced_cost_mp1(const Route& route, const DualPrices& duals);
/// Leader master reduced cost: co_r - sum lambda + sum mu * usage + cap * c_r.
[[nodiscard]] double reduced_cost_mp0(const Route& route, const DualPrices& duals);
/// Pricing context that reproduces the reduced cost of `kind` under `duals`.
[[nodiscard]] PricingContext pricing_context(const MasterSpec& spec, const DualPrices& duals, int vehicle_type);
/// Whether the route may appear in the master (uses open stations within their port count).
[[nodiscard]] bool admissible(const Route& route, const MasterSpec& spec);

struct Stabilization {
  bool enabled = true;
  double half_width = 0.0;  // 0: 10% of the mean single-customer route cost
  double penalty = 1.0;     // bound on each box slack
};

struct ColgenOptions {
  Stabilization stabilization;
  int max_iterations = 500;
  std::size_t routes_per_pricing = 60;
  bool parallel_pricing = true;
  bool trace = false;
};

struct ColgenIteration {
  int iter = 0;
  double lp_obj = 0.0;
  std::vector<double> best_phi;  // per vehicle type
  std::size_t pool_size = 0;
  double box_width = 0.0;
};

struct MasterSolution {
  lp::Solution lp;
  DualPrices duals;
  std::vector<std::size_t> column_route;  // pool index of every route column
  bool uses_artificial = false;
  bool uses_box = false;
};

/// Solves the restricted master LP over the admissible pool routes. With a
/// box, coverage rows get bounded slack columns priced around `center`.
[[nodiscard]] MasterSolution solve_rmp(const PtenGraph& graph, const MasterSpec& spec, const ColumnPool& pool,
                                       const DualPrices* center = nullptr, double half_width = 0.0,
                                       double penalty = 1.0);

/// Restricted master as an lp::Model (integer route columns when `integer`).
[[nodiscard]] lp::Model build_master(const PtenGraph& graph, const MasterSpec& spec, const ColumnPool& pool,
                                     bool integer, std::vector<std::size_t>* column_route = nullptr);

struct ColgenResult {
  double lp_bound = 0.0;
  DualPrices duals;
  bool lp_feasible = true;  // false when artificial columns remain at the LP optimum
  std::vector<ColgenIteration> log;
};

/// Master/pricing loop until no route has negative reduced cost. The returned
/// bound is certified by an unstabilized master. Throws IterationLimit.
[[nodiscard]] ColgenResult run_column_generation(const PtenGraph& graph, const MasterSpec& spec, ColumnPool& pool,
                                                 const ColgenOptions& options = {});

struct IntegerResult {
  bool feasible = false;
  FleetPlan plan;  // ports assigned
  double objective = 0.0;
  std::size_t routes_enumerated = 0;
};

/// Integer master over the pool. Routes whose reduced cost could still close
/// the gap between the integer value and the LP bound are enumerated first,
/// so the result is optimal over all routes, not just generated ones.
[[nodiscard]] IntegerResult integerize(const PtenGraph& graph, const MasterSpec& spec, ColumnPool& pool,
                                       const ColgenResult& lp);

/// Column generation followed by integerize.
[[nodiscard]] IntegerResult solve_master(const PtenGraph& graph, const MasterSpec& spec, ColumnPool& pool,
                                         const ColgenOptions& options = {}, ColgenResult* lp_out = nullptr);

[[nodiscard]] std::string format_iteration_log(const std::vector<ColgenIteration>& log);

}  // namespace elrp
