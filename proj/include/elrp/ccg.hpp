#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "elrp/colgen.hpp"
#include "elrp/evaluate.hpp"
#include "elrp/mathprog.hpp"
#include "elrp/money.hpp"
#include "elrp/pten.hpp"

namespace elrp {

/// A follower response fixed in an earlier round. Its charging usage decides
/// under which leader decisions it stays executable.
struct Scenario {
  int index = 0;
  FleetPlan plan;
  Money fo_cost;
  std::vector<std::vector<int>> usage;  // [station][t] charging vehicles

  static Scenario from_plan(const Instance& instance, int index, FleetPlan plan);
  /// True when every charging step fits the port counts.
  [[nodiscard]] bool executable(const std::vector<int>& ports) const;
};

struct CcgIteration {
  int iter = 0;
  double lb = 0.0;
  double ub = 0.0;
  double gap = 0.0;
  std::size_t n_scenarios = 0;
  bool sp2_feasible = false;
  LeaderDecision decision;  // SP0 choice of this round
};

struct CcgState {
  std::vector<Scenario> scenarios;
  double lb = -std::numeric_limits<double>::infinity();
  double ub = std::numeric_limits<double>::infinity();
  std::optional<std::pair<LeaderDecision, FleetPlan>> incumbent;
  int iteration = 0;
  double epsilon = 0.0;
};

struct CcgOptions {
  std::optional<double> epsilon;  // absolute; default 1e-4 * max(1, |UB|)
  int max_iterations = 50;
  ColgenOptions colgen;
  bool trace = false;
};

struct Sp0Result {
  LeaderDecision decision;
  FleetPlan plan;  // leader-preferred plan within the scenario caps
  Money objective;
};

struct Sp1Result {
  FleetPlan plan;
  Money fleet_cost;
};

struct Sp2Result {
  FleetPlan plan;
  Money leader_cost;  // capital cost plus owner cost of the plan
  Money fleet_cost;
};

struct CcgResult {
  LeaderDecision decision;
  FleetPlan plan;
  Money leader_cost;
  Money follower_cost;
  double lb = 0.0;
  double ub = 0.0;
  int iterations = 0;
  std::vector<CcgIteration> log;
};

/// Column-and-constraint generation for the station-owner / fleet-operator
/// game. One solver keeps a route pool and master caches for its graph.
class CcgSolver {
 public:
  explicit CcgSolver(const PtenGraph& graph, CcgOptions options = {});

  /// Leader master relaxed to the scenario cuts: for every port vector of the
  /// leader grid, the fleet cost is capped by the cheapest scenario still
  /// executable under it. Throws InfeasibleError.
  [[nodiscard]] Sp0Result solve_sp0(const CcgState& state);
  /// Follower best response. Throws InfeasibleError.
  [[nodiscard]] Sp1Result solve_sp1(const LeaderDecision& decision);
  /// Owner-best plan among follower plans costing at most theta1 (+1e-6).
  [[nodiscard]] std::optional<Sp2Result> solve_sp2(const LeaderDecision& decision, Money theta1);
  /// Full loop. Throws IterationLimit with the last bounds.
  [[nodiscard]] CcgResult run();

  [[nodiscard]] const ColumnPool& pool() const { return pool_; }

 private:
  struct Cached {
    ColgenResult lp;
    std::optional<IntegerResult> integer;
  };
  Cached& leader_master(const std::vector<int>& ports, std::optional<double> cap, bool need_integer);

  const PtenGraph* graph_;
  CcgOptions options_;
  ColumnPool pool_;
  std::vector<std::vector<int>> grid_;
  std::map<std::pair<std::vector<int>, std::int64_t>, Cached> leader_cache_;
};

[[nodiscard]] CcgResult run_ccg(const PtenGraph& graph, const CcgOptions& options = {});
[[nodiscard]] CcgResult run_ccg(std::shared_ptr<const Instance> instance, const CcgOptions& options = {});

[[nodiscard]] std::string format_ccg_log(const std::vector<CcgIteration>& log);

/// Single-level restricted leader problem over a fixed route set, with
/// binaries v[z][i][t] (scenario z needs more ports than built at (i, t)) and
/// f[z] (scenario z executable) switching the fleet-cost cuts on and off.
/// Used to cross-check solve_sp0 on small instances.
struct Sp0Milp {
  lp::Model model;
  std::vector<int> port_columns;   // per station
  std::vector<int> route_columns;  // per route
  std::vector<int> executable_columns;  // per scenario
};
[[nodiscard]] Sp0Milp build_sp0_milp(const PtenGraph& graph, const std::vector<Route>& routes,
                                     const std::vector<Scenario>& scenarios);

/// Single decision maker owning stations and fleet: minimizes capital cost
/// plus fleet cost plus owner cost over the leader grid (the service fee
/// cancels). Costs are split between the two roles afterwards.
struct SingleEntityResult {
  LeaderDecision decision;
  FleetPlan plan;
  Money total;
  Money fo_cost;
  Money csp_cost;
};
[[nodiscard]] SingleEntityResult solve_single_entity(const PtenGraph& graph, const ColgenOptions& options = {});

}  // namespace elrp
