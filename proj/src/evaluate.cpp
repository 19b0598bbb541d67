#include "elrp/evaluate.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <map>
#include <tuple>

#include <fmt/format.h>

namespace elrp {

namespace {

constexpr double kTol = 1e-9;

const VehicleType& vehicle(const Instance& inst, int k) { return inst.vehicle_types()[static_cast<std::size_t>(k)]; }
const StationCandidate& station(const Instance& inst, int s) { return inst.stations()[static_cast<std::size_t>(s)]; }

}  // namespace

const char* to_string(RouteViolation v) {
  switch (v) {
    case RouteViolation::InvalidRoute: return "invalid_route";
    case RouteViolation::TimeWindow: return "time_window";
    case RouteViolation::Overload: return "overload";
    case RouteViolation::EnergyDepletion: return "energy_depletion";
    case RouteViolation::Overcharge: return "overcharge";
    case RouteViolation::SlotMismatch: return "slot_mismatch";
    case RouteViolation::RouteLength: return "route_length";
    case RouteViolation::ZeroChargeVisit: return "zero_charge_visit";
  }
  return "?";
}

Money CostModel::vehicle(int k) const {
  return Money::from_double(instance_->vehicle_life_factor() * elrp::vehicle(*instance_, k).purchase_cost);
}

Money CostModel::travel(int k, double distance) const {
  return Money::from_double(elrp::vehicle(*instance_, k).travel_cost_per_length * distance *
                            instance_->economics().operating_days);
}

double CostModel::step_energy(int s) const {
  return charged_energy(1, station(*instance_, s).rated_power, instance_->economics().time_step_hours);
}

Money CostModel::charge_payment(int s, int t) const {
  const double price = station(*instance_, s).electricity_price[static_cast<std::size_t>(t)] +
                       instance_->economics().service_fee[static_cast<std::size_t>(s)];
  return Money::from_double(price * step_energy(s) * instance_->economics().operating_days);
}

Money CostModel::charge_revenue(int s, int /*t*/) const {
  return Money::from_double(instance_->economics().service_fee[static_cast<std::size_t>(s)] * step_energy(s) *
                            instance_->economics().operating_days);
}

std::vector<std::pair<int, int>> Route::charging_steps() const {
  std::vector<std::pair<int, int>> out;
  for (const ChargingSession& s : sessions) {
    for (int t = s.start; t < s.end; ++t) out.emplace_back(s.station, t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int Route::num_customers() const { return std::popcount(covered); }

RouteSimulator::RouteSimulator(const PtenGraph& graph, int vehicle_type) : graph_(&graph), k_(vehicle_type) {
  const VehicleType& v = vehicle(graph.instance(), vehicle_type);
  capacity_ = v.freight_capacity;
  battery_ = v.battery_capacity;
  rate_ = v.consumption_rate;
  max_length_ = graph.instance().economics().max_route_length;
}

SimState RouteSimulator::start() const {
  SimState s;
  s.node = graph_->depot();
  s.energy = battery_;
  return s;
}

std::optional<RouteViolation> RouteSimulator::step(const SimState& from, int arc_id, SimState& out) const {
  const PtenArc& a = graph_->arc(arc_id);
  if (a.from != from.node) return RouteViolation::InvalidRoute;
  const PtenNode& head = graph_->node(a.to);
  const Instance& inst = graph_->instance();
  out = from;
  out.node = a.to;
  if (a.internal) {
    out.energy = from.energy + charged_energy(1, station(inst, a.station).rated_power, inst.economics().time_step_hours);
    if (out.energy > battery_ + kTol) return RouteViolation::Overcharge;
    out.time = head.time;
    out.charged = true;
    return std::nullopt;
  }
  if (graph_->node(from.node).kind == NodeKind::StationDummy && !from.charged) return RouteViolation::ZeroChargeVisit;
  out.energy = from.energy - rate_ * a.distance;
  if (out.energy < -kTol) return RouteViolation::EnergyDepletion;
  out.distance = from.distance + a.distance;
  if (max_length_ && out.distance > *max_length_ + kTol) return RouteViolation::RouteLength;
  const int arrival = from.time + a.travel_time;
  out.charged = false;
  switch (head.kind) {
    case NodeKind::Customer: {
      const std::uint64_t bit = std::uint64_t{1} << head.customer;
      if ((from.visited & bit) != 0) return RouteViolation::InvalidRoute;
      const Customer& c = inst.customers()[static_cast<std::size_t>(head.customer)];
      const int begin = std::max(arrival, c.window_early);
      if (begin > c.window_late) return RouteViolation::TimeWindow;
      out.delivered = from.delivered + c.demand;
      if (out.delivered > capacity_ + kTol) return RouteViolation::Overload;
      out.visited = from.visited | bit;
      out.time = begin + c.service_time;
      return std::nullopt;
    }
    case NodeKind::StationDummy:
      if (arrival > head.time) return RouteViolation::SlotMismatch;
      out.time = head.time;
      return std::nullopt;
    case NodeKind::DepotSink:
      if (arrival > inst.horizon()) return RouteViolation::TimeWindow;
      out.time = arrival;
      return std::nullopt;
    case NodeKind::Depot:
    case NodeKind::StationCandidate: return RouteViolation::InvalidRoute;
  }
  return RouteViolation::InvalidRoute;
}

namespace {

struct Simulated {
  std::optional<Route> route;
  RouteViolation violation = RouteViolation::InvalidRoute;
  std::string detail;
};

Simulated run_simulation(const PtenGraph& graph, int k, const std::vector<int>& nodes) {
  Simulated res;
  const Instance& inst = graph.instance();
  if (k < 0 || k >= inst.num_vehicle_types()) {
    res.detail = fmt::format("unknown vehicle type index {}", k);
    return res;
  }
  if (nodes.size() < 3 || nodes.front() != graph.depot() || nodes.back() != graph.sink()) {
    res.detail = "route must start at the depot, end at the sink and visit at least one node";
    return res;
  }
  RouteSimulator sim(graph, k);
  CostModel costs(inst);
  Route r;
  r.vehicle_type = k;
  r.nodes = nodes;
  r.vehicle_cost = costs.vehicle(k);
  SimState state = sim.start();
  r.visits.push_back({nodes.front(), 0, 0.0, state.energy});
  std::vector<double> delivered{0.0};
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    auto arc = graph.find_arc(nodes[i - 1], nodes[i]);
    if (!arc) {
      res.detail = fmt::format("no arc {} -> {}", graph.node(nodes[i - 1]).name, graph.node(nodes[i]).name);
      return res;
    }
    SimState next;
    if (auto v = sim.step(state, *arc, next)) {
      res.violation = *v;
      res.detail = fmt::format("{} entering {}", to_string(*v), graph.node(nodes[i]).name);
      return res;
    }
    const PtenArc& a = graph.arc(*arc);
    const PtenNode& head = graph.node(a.to);
    if (a.internal) {
      r.sessions.back().end = head.time;
      r.charging_cost += costs.charge_payment(a.station, a.time);
      r.fee_revenue += costs.charge_revenue(a.station, a.time);
      r.energy_purchased += costs.step_energy(a.station);
    } else {
      r.travel_cost += costs.travel(k, a.distance);
      if (head.kind == NodeKind::StationDummy) r.sessions.push_back({head.station, head.port, head.time, head.time});
    }
    state = next;
    r.visits.push_back({nodes[i], state.time, 0.0, state.energy});
    if (head.kind == NodeKind::Customer) {
      r.visits.back().arrival = state.time - inst.customers()[static_cast<std::size_t>(head.customer)].service_time;
    }
    if (head.kind == NodeKind::DepotSink && i + 1 != nodes.size()) {
      res.detail = "sink must be the last node";
      return res;
    }
    delivered.push_back(state.delivered);
  }
  if (state.visited == 0) {
    res.detail = "route serves no customer";
    return res;
  }
  r.covered = state.visited;
  r.distance = state.distance;
  for (std::size_t i = 0; i < r.visits.size(); ++i) r.visits[i].load_after = state.delivered - delivered[i];
#ifndef NDEBUG
  const VehicleType& v = inst.vehicle_types()[static_cast<std::size_t>(k)];
  for (const RouteVisit& visit : r.visits) {
    assert(visit.load_after >= -kTol && visit.load_after <= v.freight_capacity + kTol);
    assert(visit.energy_after >= -kTol && visit.energy_after <= v.battery_capacity + kTol);
  }
#endif
  res.route = std::move(r);
  return res;
}

}  // namespace

Route simulate_route(const PtenGraph& graph, int vehicle_type, const std::vector<int>& nodes) {
  Simulated s = run_simulation(graph, vehicle_type, nodes);
  if (!s.route) throw RouteError(s.violation, s.detail);
  return std::move(*s.route);
}

std::optional<Route> try_simulate(const PtenGraph& graph, int vehicle_type, const std::vector<int>& nodes) {
  return run_simulation(graph, vehicle_type, nodes).route;
}

LeaderDecision LeaderDecision::with_ports(const Instance& instance, const std::vector<int>& ports) {
  LeaderDecision d;
  const auto n = static_cast<std::size_t>(instance.num_stations());
  d.build.assign(n, 0);
  d.ports.assign(n, 0);
  d.upgrade.assign(n, 0.0);
  for (std::size_t i = 0; i < n && i < ports.size(); ++i) {
    if (ports[i] <= 0) continue;
    const StationCandidate& s = instance.stations()[i];
    d.build[i] = 1;
    d.ports[i] = ports[i];
    d.upgrade[i] = std::max(0.0, ports[i] * s.rated_power - s.min_grid_capacity());
  }
  return d;
}

LeaderDecision LeaderDecision::nothing(const Instance& instance) { return with_ports(instance, {}); }

void LeaderDecision::validate(const Instance& instance) const {
  const auto n = static_cast<std::size_t>(instance.num_stations());
  if (build.size() != n || ports.size() != n || upgrade.size() != n) {
    throw ValidationError("decision", "needs one entry per station");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const StationCandidate& s = instance.stations()[i];
    const std::string f = fmt::format("decision[{}]", s.id);
    if (build[i] != 0 && build[i] != 1) throw ValidationError(f + ".build", "must be 0 or 1");
    if (upgrade[i] < 0.0) throw ValidationError(f + ".upgrade", "must be >= 0");
    if (build[i] == 0) {
      if (ports[i] != 0 || upgrade[i] != 0.0) throw ValidationError(f, "unbuilt station cannot have ports or upgrade");
      continue;
    }
    if (ports[i] < s.size_min || ports[i] > s.size_max) {
      throw ValidationError(f + ".ports", fmt::format("must lie in [{}, {}]", s.size_min, s.size_max));
    }
    if (ports[i] * s.rated_power - s.min_grid_capacity() > upgrade[i] + kTol) {
      throw ValidationError(f + ".upgrade", "too small for the rated power of all ports");
    }
  }
}

Money LeaderDecision::capex(const Instance& instance) const {
  Money total;
  for (std::size_t i = 0; i < ports.size(); ++i) {
    if (build[i] == 0) continue;
    const StationCandidate& s = instance.stations()[i];
    total += Money::from_double(instance.station_life_factor() * (s.port_cost * ports[i] + s.upgrade_cost * upgrade[i]));
  }
  return total;
}

int LeaderDecision::stations_built() const {
  return static_cast<int>(std::count(build.begin(), build.end(), 1));
}

int LeaderDecision::total_ports() const {
  int total = 0;
  for (int p : ports) total += p;
  return total;
}

Money fo_cost(const FleetPlan& plan) {
  Money total;
  for (const Route& r : plan.routes) total += r.cost();
  return total;
}

Money csp_cost(const Instance& instance, const LeaderDecision& decision, const FleetPlan& plan) {
  Money total = decision.capex(instance);
  for (const Route& r : plan.routes) total += r.owner_cost();
  return total;
}

double energy_sold(const FleetPlan& plan) {
  double total = 0.0;
  for (const Route& r : plan.routes) total += r.energy_purchased;
  return total;
}

std::vector<int> peak_usage(const Instance& instance, const FleetPlan& plan) {
  std::vector<std::vector<int>> count(static_cast<std::size_t>(instance.num_stations()),
                                      std::vector<int>(static_cast<std::size_t>(instance.horizon()), 0));
  for (const Route& r : plan.routes) {
    for (auto [s, t] : r.charging_steps()) ++count[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
  }
  std::vector<int> peak(count.size(), 0);
  for (std::size_t s = 0; s < count.size(); ++s) peak[s] = *std::max_element(count[s].begin(), count[s].end());
  return peak;
}

FleetPlan assign_ports(const PtenGraph& graph, const FleetPlan& plan) {
  struct Ref {
    int station, start, end;
    std::size_t route, session;
  };
  std::vector<Ref> refs;
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const auto& sessions = plan.routes[r].sessions;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
      refs.push_back({sessions[i].station, sessions[i].start, sessions[i].end, r, i});
    }
  }
  std::sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) {
    return std::tie(a.station, a.start, a.route, a.session) < std::tie(b.station, b.start, b.route, b.session);
  });
  // new_port[route][session]
  std::vector<std::vector<int>> new_port(plan.routes.size());
  for (std::size_t r = 0; r < plan.routes.size(); ++r) new_port[r].assign(plan.routes[r].sessions.size(), 1);
  std::map<int, std::vector<int>> busy_until;  // station -> per port release slot
  for (const Ref& ref : refs) {
    auto& ports = busy_until[ref.station];
    std::size_t p = 0;
    while (p < ports.size() && ports[p] > ref.start) ++p;
    if (p == ports.size()) ports.push_back(0);
    ports[p] = ref.end;
    new_port[ref.route][ref.session] = static_cast<int>(p) + 1;
  }
  FleetPlan out;
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const Route& route = plan.routes[r];
    std::vector<int> nodes = route.nodes;
    std::size_t session = 0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const PtenNode& n = graph.node(nodes[i]);
      if (n.kind != NodeKind::StationDummy) continue;
      if (graph.node(nodes[i - 1]).kind != NodeKind::StationDummy) ++session;
      const int port = new_port[r][session - 1];
      auto id = graph.dummy(n.station, n.time, port);
      if (!id) {
        throw CapacityError(fmt::format("station '{}' needs port {} at t={}",
                                        graph.instance().stations()[static_cast<std::size_t>(n.station)].id, port,
                                        n.time));
      }
      nodes[i] = *id;
    }
    out.routes.push_back(simulate_route(graph, route.vehicle_type, nodes));
  }
  return out;
}

std::string Violation::to_string() const {
  std::string s = "violation kind=" + kind;
  if (!station.empty()) s += " station=" + station;
  if (t >= 0) s += fmt::format(" t={}", t);
  if (!customer.empty()) s += " customer=" + customer;
  if (route >= 0) s += fmt::format(" route={}", route);
  if (!detail.empty()) s += " detail=\"" + detail + "\"";
  return s;
}

std::vector<Violation> check_joint_feasibility(const PtenGraph& graph, const LeaderDecision& decision,
                                               const FleetPlan& plan) {
  const Instance& inst = graph.instance();
  std::vector<Violation> out;
  try {
    decision.validate(inst);
  } catch (const ValidationError& e) {
    out.push_back({"decision", "", -1, "", -1, e.what()});
    return out;
  }
  const auto ns = static_cast<std::size_t>(inst.num_stations());
  const auto horizon = static_cast<std::size_t>(inst.horizon());
  std::vector<int> served(static_cast<std::size_t>(inst.num_customers()), 0);
  std::vector<std::vector<int>> usage(ns, std::vector<int>(horizon, 0));
  std::map<int, int> dummy_starts;  // dummy node -> internal arcs leaving it
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const Route& route = plan.routes[r];
    Simulated sim = run_simulation(graph, route.vehicle_type, route.nodes);
    if (!sim.route) {
      out.push_back({"route", "", -1, "", static_cast<int>(r), sim.detail});
      continue;
    }
    for (int c = 0; c < inst.num_customers(); ++c) {
      if ((sim.route->covered >> c) & 1U) ++served[static_cast<std::size_t>(c)];
    }
    std::vector<int> unbuilt_seen;
    for (std::size_t i = 1; i < route.nodes.size(); ++i) {
      auto arc = graph.find_arc(route.nodes[i - 1], route.nodes[i]);
      const PtenArc& a = graph.arc(*arc);
      if (!a.internal) continue;
      ++usage[static_cast<std::size_t>(a.station)][static_cast<std::size_t>(a.time)];
      ++dummy_starts[a.from];
      if (decision.build[static_cast<std::size_t>(a.station)] == 0 &&
          std::find(unbuilt_seen.begin(), unbuilt_seen.end(), a.station) == unbuilt_seen.end()) {
        unbuilt_seen.push_back(a.station);
        out.push_back({"unbuilt_station", inst.stations()[static_cast<std::size_t>(a.station)].id, a.time, "",
                       static_cast<int>(r), ""});
      }
    }
  }
  for (int c = 0; c < inst.num_customers(); ++c) {
    const int n = served[static_cast<std::size_t>(c)];
    if (n == 0) out.push_back({"coverage_missing", "", -1, inst.customers()[static_cast<std::size_t>(c)].id, -1, ""});
    if (n > 1) {
      out.push_back({"coverage_duplicate", "", -1, inst.customers()[static_cast<std::size_t>(c)].id, -1,
                     fmt::format("served {} times", n)});
    }
  }
  for (auto [node, n] : dummy_starts) {
    if (n > 1) {
      const PtenNode& d = graph.node(node);
      out.push_back({"dummy_reuse", inst.stations()[static_cast<std::size_t>(d.station)].id, d.time, "", -1,
                     fmt::format("port {} used {} times", d.port, n)});
    }
  }
  for (std::size_t s = 0; s < ns; ++s) {
    if (decision.build[s] == 0) continue;
    for (std::size_t t = 0; t < horizon; ++t) {
      if (usage[s][t] > decision.ports[s]) {
        out.push_back({"port_capacity", inst.stations()[s].id, static_cast<int>(t), "", -1,
                       fmt::format("{} vehicles, {} ports", usage[s][t], decision.ports[s])});
      }
    }
  }
  return out;
}

EncodedPlan encode_plan(const PtenGraph& graph, const FleetPlan& plan) {
  EncodedPlan enc;
  const auto na = static_cast<std::size_t>(graph.num_arcs());
  const auto nn = static_cast<std::size_t>(graph.num_nodes());
  for (const Route& r : plan.routes) {
    enc.vehicle_type.push_back(r.vehicle_type);
    enc.x.emplace_back(na, 0);
    enc.tau.emplace_back(nn, -1.0);
    enc.energy.emplace_back(nn, -1.0);
    enc.load.emplace_back(nn, -1.0);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const auto v = static_cast<std::size_t>(r.nodes[i]);
      enc.tau.back()[v] = r.visits[i].arrival;
      enc.energy.back()[v] = r.visits[i].energy_after;
      enc.load.back()[v] = r.visits[i].load_after;
      if (i > 0) enc.x.back()[static_cast<std::size_t>(*graph.find_arc(r.nodes[i - 1], r.nodes[i]))] = 1;
    }
  }
  return enc;
}

}  // namespace elrp
