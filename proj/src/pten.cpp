#include "elrp/pten.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

#include "elrp/errors.hpp"

namespace elrp {

PtenGraph::PtenGraph(std::shared_ptr<const Instance> instance, std::vector<PtenNode> nodes, std::vector<PtenArc> arcs)
    : instance_(std::move(instance)), nodes_(std::move(nodes)), arcs_(std::move(arcs)) {
  const Instance& inst = *instance_;
  customer_nodes_.assign(static_cast<std::size_t>(inst.num_customers()), -1);
  dummy_index_.resize(static_cast<std::size_t>(inst.num_stations()));
  internal_by_station_.resize(static_cast<std::size_t>(inst.num_stations()));
  for (int s = 0; s < inst.num_stations(); ++s) {
    const auto& st = inst.stations()[static_cast<std::size_t>(s)];
    dummy_index_[static_cast<std::size_t>(s)].assign(
        static_cast<std::size_t>(st.size_max), std::vector<int>(static_cast<std::size_t>(inst.horizon()), -1));
  }
  for (int v = 0; v < num_nodes(); ++v) {
    const PtenNode& n = node(v);
    switch (n.kind) {
      case NodeKind::Depot: depot_ = v; break;
      case NodeKind::DepotSink: sink_ = v; break;
      case NodeKind::Customer: customer_nodes_[static_cast<std::size_t>(n.customer)] = v; break;
      case NodeKind::StationDummy:
        dummy_index_[static_cast<std::size_t>(n.station)][static_cast<std::size_t>(n.port - 1)]
                    [static_cast<std::size_t>(n.time)] = v;
        break;
      case NodeKind::StationCandidate: break;
    }
  }
  // CSR adjacency in arc order.
  out_begin_.assign(static_cast<std::size_t>(num_nodes()) + 1, 0);
  for (const PtenArc& a : arcs_) ++out_begin_[static_cast<std::size_t>(a.from) + 1];
  for (std::size_t i = 1; i < out_begin_.size(); ++i) out_begin_[i] += out_begin_[i - 1];
  out_list_.assign(arcs_.size(), -1);
  std::vector<int> fill(out_begin_.begin(), out_begin_.end() - 1);
  for (int a = 0; a < num_arcs(); ++a) {
    out_list_[static_cast<std::size_t>(fill[static_cast<std::size_t>(arc(a).from)]++)] = a;
    if (arc(a).internal) internal_by_station_[static_cast<std::size_t>(arc(a).station)].push_back(a);
  }
}

std::optional<int> PtenGraph::dummy(int station, int time, int port) const {
  if (station < 0 || station >= static_cast<int>(dummy_index_.size())) return std::nullopt;
  const auto& ports = dummy_index_[static_cast<std::size_t>(station)];
  if (port < 1 || port > static_cast<int>(ports.size())) return std::nullopt;
  const auto& times = ports[static_cast<std::size_t>(port - 1)];
  if (time < 0 || time >= static_cast<int>(times.size())) return std::nullopt;
  const int id = times[static_cast<std::size_t>(time)];
  if (id < 0) return std::nullopt;
  return id;
}

std::optional<int> PtenGraph::find_node(std::string_view name) const {
  for (int v = 0; v < num_nodes(); ++v) {
    if (node(v).name == name) return v;
  }
  return std::nullopt;
}

std::span<const int> PtenGraph::out_arcs(int v) const {
  const auto b = static_cast<std::size_t>(out_begin_[static_cast<std::size_t>(v)]);
  const auto e = static_cast<std::size_t>(out_begin_[static_cast<std::size_t>(v) + 1]);
  return std::span<const int>(out_list_).subspan(b, e - b);
}

std::optional<int> PtenGraph::find_arc(int from, int to) const {
  for (int a : out_arcs(from)) {
    if (arc(a).to == to) return a;
  }
  return std::nullopt;
}

int PtenGraph::num_dummies(int station) const {
  int count = 0;
  for (const auto& port : dummy_index_[static_cast<std::size_t>(station)]) {
    count += static_cast<int>(std::count_if(port.begin(), port.end(), [](int id) { return id >= 0; }));
  }
  return count;
}

bool PtenGraph::has_charging_slot(int station, int t) const {
  auto from = dummy(station, t, 1);
  auto to = dummy(station, t + 1, 1);
  return from && to;
}

PtenGraph expand(std::shared_ptr<const Instance> instance_ptr) {
  const Instance& inst = *instance_ptr;
  for (const StationCandidate& s : inst.stations()) {
    if (s.size_max <= 0) {
      throw CapacityError(fmt::format("station '{}' is a candidate but size_max = {}", s.id, s.size_max));
    }
  }

  std::vector<PtenNode> nodes;
  nodes.push_back({NodeKind::Depot, -1, -1, -1, -1, inst.data().depot_id});
  for (int c = 0; c < inst.num_customers(); ++c) {
    nodes.push_back({NodeKind::Customer, c, -1, -1, -1, inst.customers()[static_cast<std::size_t>(c)].id});
  }
  nodes.push_back({NodeKind::DepotSink, -1, -1, -1, -1, inst.data().depot_id + "'"});
  // dummies[s] lists (node id) for every dummy of station s.
  std::vector<std::vector<int>> dummies(static_cast<std::size_t>(inst.num_stations()));
  for (int s = 0; s < inst.num_stations(); ++s) {
    const StationCandidate& st = inst.stations()[static_cast<std::size_t>(s)];
    for (int p = 1; p <= st.size_max; ++p) {
      for (int t : st.slots) {
        dummies[static_cast<std::size_t>(s)].push_back(static_cast<int>(nodes.size()));
        nodes.push_back({NodeKind::StationDummy, -1, s, t, p, fmt::format("{}-{}-{}", st.id, p, t)});
      }
    }
  }
  const int depot = 0;
  const int sink = inst.num_customers() + 1;
  auto customer_node = [](int c) { return c + 1; };

  std::vector<PtenArc> arcs;
  auto external = [&](int from, int to, const EdgeData& e) {
    arcs.push_back({from, to, false, e.distance, e.travel_time, -1, -1});
  };

  const BaseGraphIndex& idx = inst.base_index();
  // Arcs leaving the depot.
  for (int c = 0; c < inst.num_customers(); ++c) {
    if (const auto& e = inst.edge(idx.depot, inst.customer_base(c))) external(depot, customer_node(c), *e);
  }
  for (int s = 0; s < inst.num_stations(); ++s) {
    if (const auto& e = inst.edge(idx.depot, inst.station_base(s))) {
      for (int d : dummies[static_cast<std::size_t>(s)]) external(depot, d, *e);
    }
  }
  // Arcs leaving customers.
  for (int c = 0; c < inst.num_customers(); ++c) {
    const int cb = inst.customer_base(c);
    for (int c2 = 0; c2 < inst.num_customers(); ++c2) {
      if (c2 == c) continue;
      if (const auto& e = inst.edge(cb, inst.customer_base(c2))) external(customer_node(c), customer_node(c2), *e);
    }
    for (int s = 0; s < inst.num_stations(); ++s) {
      if (const auto& e = inst.edge(cb, inst.station_base(s))) {
        for (int d : dummies[static_cast<std::size_t>(s)]) external(customer_node(c), d, *e);
      }
    }
    if (const auto& e = inst.edge(cb, idx.depot)) external(customer_node(c), sink, *e);
  }
  // Arcs leaving dummies: to customers and the sink. Station-to-station moves are not modelled.
  for (int s = 0; s < inst.num_stations(); ++s) {
    const int sb = inst.station_base(s);
    for (int d : dummies[static_cast<std::size_t>(s)]) {
      for (int c = 0; c < inst.num_customers(); ++c) {
        if (const auto& e = inst.edge(sb, inst.customer_base(c))) external(d, customer_node(c), *e);
      }
      if (const auto& e = inst.edge(sb, idx.depot)) external(d, sink, *e);
    }
  }
  // Internal charging arcs: same port, next slot.
  for (int s = 0; s < inst.num_stations(); ++s) {
    const auto& ds = dummies[static_cast<std::size_t>(s)];
    for (std::size_t a = 0; a < ds.size(); ++a) {
      for (std::size_t b = 0; b < ds.size(); ++b) {
        const PtenNode& j = nodes[static_cast<std::size_t>(ds[a])];
        const PtenNode& m = nodes[static_cast<std::size_t>(ds[b])];
        if (m.port == j.port && m.time - j.time == 1) {
          arcs.push_back({ds[a], ds[b], true, 0.0, 1, s, j.time});
        }
      }
    }
  }
  // Keep arcs grouped by tail node; stable so the construction order inside a node is preserved.
  std::stable_sort(arcs.begin(), arcs.end(), [](const PtenArc& x, const PtenArc& y) { return x.from < y.from; });
  return PtenGraph(std::move(instance_ptr), std::move(nodes), std::move(arcs));
}

std::vector<int> arcs_at(const PtenGraph& graph, std::string_view station, int t) {
  auto s = graph.instance().station_index(std::string(station));
  if (!s) throw UnknownStation(fmt::format("unknown station '{}'", station));
  std::vector<int> out;
  for (int a : graph.internal_arcs(*s)) {
    if (graph.arc(a).time == t) out.push_back(a);
  }
  return out;
}

std::string dump_graph(const PtenGraph& graph) {
  std::ostringstream out;
  for (const PtenNode& n : graph.nodes()) {
    out << fmt::format("node {} kind={} t={} p={}\n", n.name, to_string(n.kind), n.time, n.port);
  }
  for (const PtenArc& a : graph.arcs()) {
    out << fmt::format("arc {} {} kind={} d={} tt={}\n", graph.node(a.from).name, graph.node(a.to).name,
                       a.internal ? "internal" : "external", a.distance, a.travel_time);
  }
  return out.str();
}

}  // namespace elrp
