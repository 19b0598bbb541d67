#include "elrp/spprc.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "elrp/log.hpp"

namespace elrp {

namespace {

constexpr double kTol = 1e-9;

double slot_dual(const PricingContext& ctx, int station, int t) {
  if (ctx.slot_dual.empty()) return 0.0;
  return ctx.slot_dual[static_cast<std::size_t>(station)][static_cast<std::size_t>(t)];
}

}  // namespace

double reduced_cost(const Route& route, const PricingContext& ctx) {
  double rc = ctx.cost_weight * route.cost().value() + ctx.revenue_weight * route.owner_cost().value();
  for (std::size_t c = 0; c < ctx.cover_dual.size(); ++c) {
    if ((route.covered >> c) & 1U) rc -= ctx.cover_dual[c];
  }
  for (auto [s, t] : route.charging_steps()) rc += slot_dual(ctx, s, t);
  return rc;
}

Labeler::Labeler(const PtenGraph& graph, const PricingContext& ctx) : graph_(&graph), ctx_(&ctx) {
  const Instance& inst = graph.instance();
  const VehicleType& v = inst.vehicle_types()[static_cast<std::size_t>(ctx.vehicle_type)];
  capacity_ = v.freight_capacity;
  battery_ = v.battery_capacity;
  rate_ = v.consumption_rate;
  max_length_ = inst.economics().max_route_length;
  CostModel costs(inst);
  root_cost_ = ctx.cost_weight * costs.vehicle(ctx.vehicle_type).value();
  arc_cost_.assign(static_cast<std::size_t>(graph.num_arcs()), 0.0);
  arc_usable_.assign(static_cast<std::size_t>(graph.num_arcs()), 1);
  for (int id = 0; id < graph.num_arcs(); ++id) {
    const PtenArc& a = graph.arc(id);
    const PtenNode& head = graph.node(a.to);
    double c = 0.0;
    if (a.internal) {
      c = ctx.cost_weight * costs.charge_payment(a.station, a.time).value() -
          ctx.revenue_weight * costs.charge_revenue(a.station, a.time).value() + slot_dual(ctx, a.station, a.time);
    } else {
      c = ctx.cost_weight * costs.travel(ctx.vehicle_type, a.distance).value();
      if (head.kind == NodeKind::Customer) c -= ctx.cover_dual[static_cast<std::size_t>(head.customer)];
    }
    arc_cost_[static_cast<std::size_t>(id)] = c;
    if (head.kind == NodeKind::StationDummy) {
      const bool open = ctx.station_open.empty() || ctx.station_open[static_cast<std::size_t>(head.station)] != 0;
      if (!open || head.port != 1) arc_usable_[static_cast<std::size_t>(id)] = 0;
    }
  }
}

Label Labeler::root() const {
  Label l;
  l.node = graph_->depot();
  l.cost = root_cost_;
  return l;
}

std::optional<Label> Labeler::extend(const Label& label, int arc_id) const {
  const PtenArc& a = graph_->arc(arc_id);
  if (a.from != label.node || arc_usable_[static_cast<std::size_t>(arc_id)] == 0) return std::nullopt;
  const PtenNode& head = graph_->node(a.to);
  const Instance& inst = graph_->instance();
  Label out = label;
  out.node = a.to;
  out.arc = arc_id;
  out.cost = label.cost + arc_cost_[static_cast<std::size_t>(arc_id)];
  if (a.internal) {
    out.energy_used = label.energy_used -
                      charged_energy(1, inst.stations()[static_cast<std::size_t>(a.station)].rated_power,
                                     inst.economics().time_step_hours);
    if (out.energy_used < -kTol) return std::nullopt;
    out.time = head.time;
    out.can_leave = true;
    return out;
  }
  if (!label.can_leave) return std::nullopt;
  out.n_visited = label.n_visited + 1;
  out.dist = label.dist + a.distance;
  if (max_length_ && out.dist > *max_length_ + kTol) return std::nullopt;
  out.energy_used = label.energy_used + rate_ * a.distance;
  if (out.energy_used > battery_ + kTol) return std::nullopt;
  const int ready = label.time + a.travel_time;
  switch (head.kind) {
    case NodeKind::Customer: {
      const std::uint64_t bit = std::uint64_t{1} << head.customer;
      if ((label.visited & bit) != 0) return std::nullopt;
      const Customer& c = inst.customers()[static_cast<std::size_t>(head.customer)];
      // Window check on the service start: the vehicle may wait for the window to open.
      const int begin = std::max(ready, c.window_early);
      if (begin > c.window_late) return std::nullopt;
      out.load = label.load + c.demand;
      if (out.load > capacity_ + kTol) return std::nullopt;
      out.visited = label.visited | bit;
      out.time = begin + c.service_time;
      out.can_leave = true;
      return out;
    }
    case NodeKind::StationDummy:
      if (ready > head.time) return std::nullopt;
      out.time = head.time;
      out.can_leave = false;
      return out;
    case NodeKind::DepotSink:
      if (ready > inst.horizon() || label.visited == 0) return std::nullopt;
      out.time = ready;
      return out;
    default: return std::nullopt;
  }
}

bool Labeler::dominates(const Label& a, const Label& b) const {
  if (a.node != b.node) return false;
  if (a.cost > b.cost) return false;
  if (a.time > b.time || a.load > b.load) return false;
  // Charging happens in whole steps and may not overfill the battery, so a
  // label with more energy left can be forced into fewer (possibly negative
  // cost) charging steps. Only equal energy states are comparable.
  if (a.energy_used != b.energy_used) return false;
  if (max_length_ && a.dist > b.dist) return false;
  if (!a.can_leave && b.can_leave) return false;
  return (a.visited & ~b.visited) == 0;
}

PricingResult solve_pricing(const PtenGraph& graph, const PricingContext& ctx) {
  Labeler labeler(graph, ctx);
  PricingResult result;
  std::vector<Label> labels;
  std::vector<char> alive;
  std::vector<std::vector<int>> bucket(static_cast<std::size_t>(graph.num_nodes()));
  std::vector<int> complete;
  using Entry = std::tuple<double, std::size_t, int>;  // cost, sequence, label id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::size_t seq = 0;

  auto insert = [&](Label l) {
    ++result.stats.labels_created;
    auto& here = bucket[static_cast<std::size_t>(l.node)];
    if (ctx.dominance) {
      for (int other : here) {
        if (alive[static_cast<std::size_t>(other)] && labeler.dominates(labels[static_cast<std::size_t>(other)], l)) {
          ++result.stats.labels_dominated;
          return;
        }
      }
      for (int other : here) {
        if (alive[static_cast<std::size_t>(other)] && labeler.dominates(l, labels[static_cast<std::size_t>(other)])) {
          alive[static_cast<std::size_t>(other)] = 0;
          ++result.stats.labels_dominated;
        }
      }
      std::erase_if(here, [&](int id) { return !alive[static_cast<std::size_t>(id)]; });
    }
    const int id = static_cast<int>(labels.size());
    labels.push_back(l);
    alive.push_back(1);
    here.push_back(id);
    if (l.node == graph.sink()) {
      complete.push_back(id);
    } else {
      open.emplace(l.cost, seq++, id);
    }
  };

  insert(labeler.root());
  while (!open.empty()) {
    const int id = std::get<2>(open.top());
    open.pop();
    if (!alive[static_cast<std::size_t>(id)]) continue;
    ++result.stats.labels_processed;
    const Label current = labels[static_cast<std::size_t>(id)];
    for (int arc : graph.out_arcs(current.node)) {
      if (auto next = labeler.extend(current, arc)) {
        next->parent = id;
        insert(*next);
      }
    }
  }

  std::vector<std::pair<double, Route>> found;
  for (int id : complete) {
    if (!alive[static_cast<std::size_t>(id)]) continue;
    if (!(labels[static_cast<std::size_t>(id)].cost < ctx.threshold + 1e-6)) continue;
    std::vector<int> nodes;
    for (int cur = id; cur >= 0; cur = labels[static_cast<std::size_t>(cur)].parent) {
      nodes.push_back(labels[static_cast<std::size_t>(cur)].node);
    }
    std::reverse(nodes.begin(), nodes.end());
    Route route = simulate_route(graph, ctx.vehicle_type, nodes);
    const double rc = reduced_cost(route, ctx);
    if (rc < ctx.threshold) found.emplace_back(rc, std::move(route));
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, a.second.nodes) < std::tie(b.first, b.second.nodes);
  });
  if (ctx.max_routes > 0 && found.size() > ctx.max_routes) found.resize(ctx.max_routes);
  for (auto& [rc, route] : found) {
    result.best_reduced_cost = std::min(result.best_reduced_cost, rc);
    result.routes.push_back(std::move(route));
  }
  result.stats.routes_found = result.routes.size();
  if (ctx.trace) {
    log().info("pricing type={} labels_created={} labels_dominated={} labels_processed={} routes_found={}",
               ctx.vehicle_type, result.stats.labels_created, result.stats.labels_dominated,
               result.stats.labels_processed, result.stats.routes_found);
  }
  return result;
}

}  // namespace elrp
