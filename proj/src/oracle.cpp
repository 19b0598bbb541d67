#include "elrp/oracle.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "elrp/errors.hpp"

namespace elrp::oracle {

namespace {

using Clock = std::chrono::steady_clock;

void check_size(const Instance& inst, const EnumerationBudget& budget) {
  if (inst.num_customers() > budget.max_customers) {
    throw BudgetExceeded(fmt::format("enumeration limited to {} customers, instance has {}", budget.max_customers,
                                     inst.num_customers()));
  }
}

class RouteEnumerator {
 public:
  RouteEnumerator(const PtenGraph& graph, int k, const EnumerationBudget& budget)
      : graph_(graph), sim_(graph, k), k_(k), budget_(budget), deadline_(Clock::now() + to_duration(budget)) {}

  std::vector<Route> run() {
    path_.push_back(graph_.depot());
    dfs(sim_.start());
    return std::move(routes_);
  }

 private:
  static Clock::duration to_duration(const EnumerationBudget& b) {
    return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(b.timeout_seconds));
  }

  void dfs(const SimState& state) {
    if ((++steps_ & 0xFFF) == 0 && Clock::now() > deadline_) throw BudgetExceeded("route enumeration timed out");
    for (int arc : graph_.out_arcs(state.node)) {
      const PtenNode& head = graph_.node(graph_.arc(arc).to);
      if (head.kind == NodeKind::StationDummy && head.port != 1) continue;
      SimState next;
      if (sim_.step(state, arc, next)) continue;
      path_.push_back(head.kind == NodeKind::DepotSink ? graph_.sink() : graph_.arc(arc).to);
      if (head.kind == NodeKind::DepotSink) {
        if (next.visited != 0) {
          routes_.push_back(simulate_route(graph_, k_, path_));
          if (routes_.size() > budget_.max_routes) {
            throw BudgetExceeded(fmt::format("more than {} routes", budget_.max_routes));
          }
        }
      } else {
        dfs(next);
      }
      path_.pop_back();
    }
  }

  const PtenGraph& graph_;
  RouteSimulator sim_;
  int k_;
  EnumerationBudget budget_;
  Clock::time_point deadline_;
  std::vector<int> path_;
  std::vector<Route> routes_;
  std::size_t steps_ = 0;
};

struct Option {
  std::uint64_t mask = 0;
  std::vector<std::pair<int, int>> usage;
  std::int64_t fo = 0;
  std::int64_t co = 0;
  const Route* route = nullptr;
};

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

/// Depth-first partition search minimizing (primary, secondary) lexicographically
/// subject to fo <= fo_cap.
class PlanSearch {
 public:
  PlanSearch(const PtenGraph& graph, const std::vector<Route>& routes, const LeaderDecision& decision,
             bool owner_first, std::int64_t fo_cap, const EnumerationBudget& budget)
      : inst_(graph.instance()), decision_(decision), owner_first_(owner_first), fo_cap_(fo_cap), budget_(budget) {
    std::map<std::pair<std::uint64_t, std::vector<std::pair<int, int>>>, std::size_t> seen;
    for (const Route& r : routes) {
      auto steps = r.charging_steps();
      if (!fits_alone(steps)) continue;
      Option o{r.covered, steps, r.cost().micros(), r.owner_cost().micros(), &r};
      auto key = std::make_pair(o.mask, o.usage);
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen.emplace(key, options_.size());
        options_.push_back(std::move(o));
      } else if (o.fo < options_[it->second].fo) {
        options_[it->second] = std::move(o);
      }
    }
    const int n = inst_.num_customers();
    full_ = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    by_customer_.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < options_.size(); ++i) {
      for (int c = 0; c < n; ++c) {
        if ((options_[i].mask >> c) & 1U) by_customer_[static_cast<std::size_t>(c)].push_back(i);
      }
    }
    lb_fo_ = cover_bound([](const Option& o) { return o.fo; });
    lb_co_ = cover_bound([](const Option& o) { return o.co; });
    usage_.assign(static_cast<std::size_t>(inst_.num_stations()),
                  std::vector<int>(static_cast<std::size_t>(inst_.horizon()), 0));
  }

  bool run() {
    dfs(0, 0, 0);
    return found_;
  }

  [[nodiscard]] std::vector<const Route*> best() const { return best_routes_; }

 private:
  bool fits_alone(const std::vector<std::pair<int, int>>& steps) const {
    std::map<std::pair<int, int>, int> count;
    for (const auto& st : steps) {
      if (decision_.build[static_cast<std::size_t>(st.first)] == 0) return false;
      if (++count[st] > decision_.ports[static_cast<std::size_t>(st.first)]) return false;
    }
    return true;
  }

  template <class F>
  std::vector<std::int64_t> cover_bound(F value) const {
    const std::size_t size = std::size_t{1} << inst_.num_customers();
    std::vector<std::int64_t> single(size, kInf);
    for (const Option& o : options_) single[o.mask] = std::min(single[o.mask], value(o));
    std::vector<std::int64_t> best(size, kInf);
    best[0] = 0;
    for (std::size_t s = 1; s < size; ++s) {
      // Partition containing the lowest customer of s.
      const std::size_t low = s & (~s + 1);
      for (std::size_t sub = s; sub != 0; sub = (sub - 1) & s) {
        if ((sub & low) == 0 || single[sub] >= kInf || best[s ^ sub] >= kInf) continue;
        best[s] = std::min(best[s], single[sub] + best[s ^ sub]);
      }
    }
    return best;
  }

  [[nodiscard]] std::pair<std::int64_t, std::int64_t> objective(std::int64_t fo, std::int64_t co) const {
    return owner_first_ ? std::make_pair(co, fo) : std::make_pair(fo, co);
  }

  void dfs(std::uint64_t covered, std::int64_t fo, std::int64_t co) {
    if (++nodes_ > budget_.max_plans) throw BudgetExceeded("plan search exceeded its node budget");
    const std::uint64_t rest = full_ & ~covered;
    if (lb_fo_[rest] >= kInf) return;
    if (fo + lb_fo_[rest] > fo_cap_) return;
    if (found_) {
      const auto bound = objective(fo + lb_fo_[rest], co + lb_co_[rest]);
      if (bound >= best_obj_) return;
    }
    if (rest == 0) {
      found_ = true;
      best_obj_ = objective(fo, co);
      best_routes_ = chosen_;
      return;
    }
    const int c = std::countr_zero(rest);
    for (std::size_t idx : by_customer_[static_cast<std::size_t>(c)]) {
      const Option& o = options_[idx];
      if ((o.mask & covered) != 0) continue;
      bool fits = true;
      std::size_t added = 0;
      for (; added < o.usage.size(); ++added) {
        auto [s, t] = o.usage[added];
        int& u = usage_[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
        if (u + 1 > decision_.ports[static_cast<std::size_t>(s)]) {
          fits = false;
          break;
        }
        ++u;
      }
      if (fits) {
        chosen_.push_back(o.route);
        dfs(covered | o.mask, fo + o.fo, co + o.co);
        chosen_.pop_back();
      }
      for (std::size_t j = 0; j < added; ++j) {
        auto [s, t] = o.usage[j];
        --usage_[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
      }
    }
  }

  const Instance& inst_;
  const LeaderDecision& decision_;
  bool owner_first_;
  std::int64_t fo_cap_;
  EnumerationBudget budget_;
  std::vector<Option> options_;
  std::vector<std::vector<std::size_t>> by_customer_;
  std::vector<std::int64_t> lb_fo_;
  std::vector<std::int64_t> lb_co_;
  std::vector<std::vector<int>> usage_;
  std::uint64_t full_ = 0;
  std::vector<const Route*> chosen_;
  std::vector<const Route*> best_routes_;
  std::pair<std::int64_t, std::int64_t> best_obj_{kInf, kInf};
  bool found_ = false;
  std::size_t nodes_ = 0;
};

PlanChoice materialize(const PtenGraph& graph, const std::vector<const Route*>& chosen) {
  FleetPlan raw;
  for (const Route* r : chosen) raw.routes.push_back(*r);
  PlanChoice out;
  out.plan = assign_ports(graph, raw);
  out.fo_cost = fo_cost(out.plan);
  for (const Route& r : out.plan.routes) out.owner_cost += r.owner_cost();
  return out;
}

GridPoint evaluate_point(const PtenGraph& graph, const std::vector<Route>& routes, const std::vector<int>& ports,
                         const EnumerationBudget& budget) {
  GridPoint p;
  p.decision = LeaderDecision::with_ports(graph.instance(), ports);
  PlanSearch follower(graph, routes, p.decision, false, kInf, budget);
  if (!follower.run()) return p;
  const PlanChoice first = materialize(graph, follower.best());
  p.follower_cost = first.fo_cost;
  // Leader-optimistic response among the follower's optimal plans.
  PlanSearch owner(graph, routes, p.decision, true, first.fo_cost.micros() + 1, budget);
  owner.run();
  const PlanChoice chosen = materialize(graph, owner.best());
  p.feasible = true;
  p.plan = chosen.plan;
  p.leader_cost = p.decision.capex(graph.instance()) + chosen.owner_cost;
  return p;
}

BilevelResult pick(std::vector<GridPoint> grid) {
  BilevelResult out;
  const GridPoint* best = nullptr;
  for (const GridPoint& p : grid) {
    if (p.feasible && (best == nullptr || p.leader_cost < best->leader_cost)) best = &p;
  }
  if (best == nullptr) throw InfeasibleError("no leader decision admits a feasible fleet plan");
  out.decision = best->decision;
  out.plan = best->plan;
  out.leader_cost = best->leader_cost;
  out.follower_cost = fo_cost(best->plan);
  out.grid = std::move(grid);
  return out;
}

}  // namespace

std::vector<Route> enumerate_routes(const PtenGraph& graph, int vehicle_type, const EnumerationBudget& budget) {
  check_size(graph.instance(), budget);
  return RouteEnumerator(graph, vehicle_type, budget).run();
}

std::vector<Route> enumerate_all_routes(const PtenGraph& graph, const EnumerationBudget& budget) {
  std::vector<Route> all;
  for (int k = 0; k < graph.instance().num_vehicle_types(); ++k) {
    auto routes = enumerate_routes(graph, k, budget);
    all.insert(all.end(), std::make_move_iterator(routes.begin()), std::make_move_iterator(routes.end()));
  }
  return all;
}

PlanChoice best_fleet_plan(const PtenGraph& graph, const std::vector<Route>& routes, const LeaderDecision& decision,
                           const EnumerationBudget& budget) {
  check_size(graph.instance(), budget);
  PlanSearch search(graph, routes, decision, false, kInf, budget);
  if (!search.run()) throw InfeasibleError("no route combination covers every customer");
  return materialize(graph, search.best());
}

std::optional<PlanChoice> best_owner_plan(const PtenGraph& graph, const std::vector<Route>& routes,
                                          const LeaderDecision& decision, Money fo_cap,
                                          const EnumerationBudget& budget) {
  check_size(graph.instance(), budget);
  PlanSearch search(graph, routes, decision, true, fo_cap.micros(), budget);
  if (!search.run()) return std::nullopt;
  return materialize(graph, search.best());
}

std::vector<std::vector<int>> leader_grid(const Instance& instance) {
  std::vector<std::vector<int>> grid{{}};
  for (const StationCandidate& s : instance.stations()) {
    std::vector<int> choices{0};
    for (int p = std::max(1, s.size_min); p <= s.size_max; ++p) choices.push_back(p);
    std::vector<std::vector<int>> next;
    for (const auto& prefix : grid) {
      for (int p : choices) {
        auto v = prefix;
        v.push_back(p);
        next.push_back(std::move(v));
      }
    }
    grid = std::move(next);
  }
  return grid;
}

BilevelResult bilevel_exhaustive(const PtenGraph& graph, const EnumerationBudget& budget) {
  const auto routes = enumerate_all_routes(graph, budget);
  const auto grid = leader_grid(graph.instance());
  std::vector<GridPoint> points(grid.size());
  std::vector<std::string> errors(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      points[i] = evaluate_point(graph, routes, grid[i], budget);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw BudgetExceeded(e);
  }
  return pick(std::move(points));
}

BilevelResult bilevel_exhaustive_serial(const PtenGraph& graph, const EnumerationBudget& budget) {
  const auto routes = enumerate_all_routes(graph, budget);
  std::vector<GridPoint> points;
  for (const auto& ports : leader_grid(graph.instance())) points.push_back(evaluate_point(graph, routes, ports, budget));
  return pick(std::move(points));
}

}  // namespace elrp::oracle
