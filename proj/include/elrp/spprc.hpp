#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "elrp/evaluate.hpp"
#include "elrp/pten.hpp"

namespace elrp {

/// Everything the pricing problem needs besides the graph.
///
/// Reduced cost of a route r:
///   cost_weight * c_r + revenue_weight * co_r - sum cover_dual[c] + sum slot_dual[i][t] * usage_r(i, t)
/// where c_r is the fleet cost and co_r the owner cost (negative fee revenue).
struct PricingContext {
  int vehicle_type = 0;
  double cost_weight = 1.0;
  double revenue_weight = 0.0;
  std::vector<double> cover_dual;              // per customer
  std::vector<std::vector<double>> slot_dual;  // [station][t]; empty means zero
  std::vector<char> station_open;              // empty means every station may be used
  double threshold = -1e-9;                    // keep complete routes with reduced cost below this
  bool dominance = true;
  std::size_t max_routes = 0;  // 0: no cap
  bool trace = false;
};

[[nodiscard]] double reduced_cost(const Route& route, const PricingContext& ctx);

struct Label {
  int node = 0;
  double cost = 0.0;
  int n_visited = 0;
  double dist = 0.0;
  double load = 0.0;
  double energy_used = 0.0;
  int time = 0;  // departure time
  bool can_leave = true;  // false at a dummy reached without charging yet
  std::uint64_t visited = 0;
  int parent = -1;
  int arc = -1;
};

/// Resource extension and dominance for one pricing context.
class Labeler {
 public:
  Labeler(const PtenGraph& graph, const PricingContext& ctx);

  [[nodiscard]] Label root() const;
  /// Extends along `arc_id`; nullopt when a resource bound or window fails,
  /// or the head is not reachable in this context (closed station, non-canonical port).
  [[nodiscard]] std::optional<Label> extend(const Label& label, int arc_id) const;
  [[nodiscard]] bool dominates(const Label& a, const Label& b) const;

 private:
  const PtenGraph* graph_;
  const PricingContext* ctx_;
  double capacity_;
  double battery_;
  double rate_;
  std::optional<double> max_length_;
  std::vector<double> arc_cost_;
  std::vector<char> arc_usable_;
  double root_cost_;
};

struct PricingStats {
  std::size_t labels_created = 0;
  std::size_t labels_dominated = 0;
  std::size_t labels_processed = 0;
  std::size_t routes_found = 0;
};

struct PricingResult {
  std::vector<Route> routes;  // ascending reduced cost
  double best_reduced_cost = std::numeric_limits<double>::infinity();
  PricingStats stats;
};

/// Label-setting search over the canonical (port 1) part of the network.
[[nodiscard]] PricingResult solve_pricing(const PtenGraph& graph, const PricingContext& ctx);

}  // namespace elrp
