#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "elrp/evaluate.hpp"
#include "elrp/money.hpp"
#include "elrp/pten.hpp"

namespace elrp::oracle {

struct EnumerationBudget {
  int max_customers = 5;
  std::size_t max_routes = 2'000'000;
  std::size_t max_plans = 50'000'000;  // search nodes in the plan search
  double timeout_seconds = 120.0;
};

/// Every feasible route of one vehicle type, using port-1 dummies only.
/// Throws BudgetExceeded.
[[nodiscard]] std::vector<Route> enumerate_routes(const PtenGraph& graph, int vehicle_type,
                                                  const EnumerationBudget& budget = {});
/// Union over all vehicle types.
[[nodiscard]] std::vector<Route> enumerate_all_routes(const PtenGraph& graph, const EnumerationBudget& budget = {});

struct PlanChoice {
  FleetPlan plan;  // ports assigned
  Money fo_cost;
  Money owner_cost;  // fee revenue counted negative, capital cost excluded
};

/// Minimum fleet-cost customer partition whose charging fits the decision.
/// Throws InfeasibleError when no partition exists.
[[nodiscard]] PlanChoice best_fleet_plan(const PtenGraph& graph, const std::vector<Route>& routes,
                                         const LeaderDecision& decision, const EnumerationBudget& budget = {});

/// Among partitions with fleet cost <= fo_cap, the one with the lowest owner
/// cost (ties: lower fleet cost). nullopt when none qualifies.
[[nodiscard]] std::optional<PlanChoice> best_owner_plan(const PtenGraph& graph, const std::vector<Route>& routes,
                                                        const LeaderDecision& decision, Money fo_cap,
                                                        const EnumerationBudget& budget = {});

struct GridPoint {
  LeaderDecision decision;
  bool feasible = false;
  Money follower_cost;  // optimal fleet cost
  Money leader_cost;    // capital cost + owner cost of the optimistic response
  FleetPlan plan;
};

struct BilevelResult {
  LeaderDecision decision;
  FleetPlan plan;
  Money leader_cost;
  Money follower_cost;
  std::vector<GridPoint> grid;  // in grid order
};

/// Port vectors of the leader grid: per station {0} and [max(1, size_min), size_max].
[[nodiscard]] std::vector<std::vector<int>> leader_grid(const Instance& instance);

/// Exhaustive optimistic bilevel search over the leader grid (parallel over grid points).
[[nodiscard]] BilevelResult bilevel_exhaustive(const PtenGraph& graph, const EnumerationBudget& budget = {});
/// Serial reference of bilevel_exhaustive.
[[nodiscard]] BilevelResult bilevel_exhaustive_serial(const PtenGraph& graph, const EnumerationBudget& budget = {});

}  // namespace elrp::oracle
