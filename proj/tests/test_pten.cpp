#include <doctest.h>

#include <algorithm>
#include <memory>
#include <random>
#include <set>

#include "elrp/errors.hpp"
#include "elrp/pten.hpp"
#include "support/random_models.hpp"

using namespace elrp;

namespace {

InstanceData toy_data() { return load_instance(testing::data_dir() + "/toy.json").data(); }

std::shared_ptr<const Instance> make(InstanceData d) { return std::make_shared<const Instance>(Instance(std::move(d))); }

int consecutive_pairs(const std::vector<int>& slots) {
  int n = 0;
  for (std::size_t i = 0; i + 1 < slots.size(); ++i) n += slots[i + 1] - slots[i] == 1 ? 1 : 0;
  return n;
}

// Structural checks that hold for every expansion.
void check_structure(const PtenGraph& g) {
  const Instance& inst = g.instance();
  int expected_nodes = 2 + inst.num_customers();
  int expected_internal = 0;
  for (const StationCandidate& s : inst.stations()) {
    expected_nodes += s.feasible_slots() * s.size_max;
    expected_internal += s.size_max * consecutive_pairs(s.slots);
  }
  CHECK(g.num_nodes() == expected_nodes);
  int internal = 0;
  for (const PtenArc& a : g.arcs()) {
    const PtenNode& from = g.node(a.from);
    const PtenNode& to = g.node(a.to);
    if (a.internal) {
      ++internal;
      CHECK(from.kind == NodeKind::StationDummy);
      CHECK(to.kind == NodeKind::StationDummy);
      CHECK(from.station == to.station);
      CHECK(from.port == to.port);
      CHECK(to.time - from.time == 1);
      CHECK(a.time == from.time);
      continue;
    }
    CHECK(to.kind != NodeKind::Depot);
    CHECK(from.kind != NodeKind::DepotSink);
    if (to.kind == NodeKind::StationDummy) {
      CHECK((from.kind == NodeKind::Customer || from.kind == NodeKind::Depot));
    }
    if (from.kind == NodeKind::StationDummy) {
      CHECK((to.kind == NodeKind::Customer || to.kind == NodeKind::DepotSink));
    }
    CHECK(!(from.kind == NodeKind::Depot && to.kind == NodeKind::DepotSink));
  }
  CHECK(internal == expected_internal);
  for (int s = 0; s < inst.num_stations(); ++s) {
    CHECK(static_cast<int>(g.internal_arcs(s).size()) == inst.stations()[static_cast<std::size_t>(s)].size_max *
                                                              consecutive_pairs(inst.stations()[static_cast<std::size_t>(s)].slots));
    CHECK(g.num_dummies(s) == inst.stations()[static_cast<std::size_t>(s)].feasible_slots() *
                                  inst.stations()[static_cast<std::size_t>(s)].size_max);
  }
}

}  // namespace

TEST_SUITE("pten") {
  TEST_CASE("four slots and two ports give eight dummies and six charging arcs") {
    InstanceData d = toy_data();
    d.stations[0].slots = {2, 3, 4, 5};
    d.stations[0].size_max = 2;
    const PtenGraph g = expand(make(d));
    CHECK(g.num_dummies(0) == 8);
    CHECK(g.internal_arcs(0).size() == 6);
    for (int p = 1; p <= 2; ++p) {
      int per_port = 0;
      for (int a : g.internal_arcs(0)) per_port += g.node(g.arc(a).from).port == p ? 1 : 0;
      CHECK(per_port == 3);
    }
  }

  TEST_CASE("toy: one charging step at F1 is an internal arc") {
    const PtenGraph g = expand(make(toy_data()));
    const auto from = g.find_node("F1-1-2");
    const auto to = g.find_node("F1-1-3");
    REQUIRE(from.has_value());
    REQUIRE(to.has_value());
    const auto arc = g.find_arc(*from, *to);
    REQUIRE(arc.has_value());
    CHECK(g.arc(*arc).internal);
    CHECK(g.dummy(0, 2, 1) == from);
    CHECK(g.node(g.sink()).kind == NodeKind::DepotSink);
    CHECK(g.node(g.depot()).kind == NodeKind::Depot);
    check_structure(g);
  }

  TEST_CASE("count identities on random slot grids") {
    std::mt19937_64 rng(29);
    for (int round = 0; round < 200; ++round) {
      InstanceData d = toy_data();
      const int horizon = std::uniform_int_distribution<int>(1, 12)(rng);
      d.economics.horizon = horizon;
      for (Customer& c : d.customers) {
        c.window_early = 0;
        c.window_late = horizon;
      }
      StationCandidate& s = d.stations[0];
      s.grid_capacity.assign(static_cast<std::size_t>(horizon), 40.0);
      s.electricity_price.assign(static_cast<std::size_t>(horizon), 0.1);
      s.size_max = std::uniform_int_distribution<int>(1, 4)(rng);
      s.size_min = 0;
      s.slots.clear();
      const bool consecutive = round % 2 == 0;
      for (int t = 0; t < horizon; ++t) {
        if (consecutive || std::bernoulli_distribution(0.6)(rng)) s.slots.push_back(t);
      }
      if (s.slots.empty()) s.slots.push_back(0);
      CAPTURE(horizon);
      CAPTURE(s.size_max);
      const PtenGraph g = expand(make(d));
      check_structure(g);
      if (consecutive) CHECK(static_cast<int>(g.internal_arcs(0).size()) == s.size_max * (horizon - 1));
    }
    for (std::uint64_t seed = 1; seed <= 60; ++seed) check_structure(expand(make(testing::random_instance(seed))));
  }

  TEST_CASE("arcs_at returns exactly the charging arcs starting at t") {
    const PtenGraph g = expand(make(testing::random_instance(7)));
    const Instance& inst = g.instance();
    for (int s = 0; s < inst.num_stations(); ++s) {
      const std::string& id = inst.stations()[static_cast<std::size_t>(s)].id;
      std::set<int> seen;
      for (int t = 0; t < inst.horizon(); ++t) {
        const auto at = arcs_at(g, id, t);
        for (int a : at) {
          CHECK(g.arc(a).internal);
          CHECK(g.arc(a).station == s);
          CHECK(g.node(g.arc(a).from).time == t);
          CHECK(seen.insert(a).second);
        }
        CHECK(static_cast<int>(at.size()) == (g.has_charging_slot(s, t) ? inst.stations()[static_cast<std::size_t>(s)].size_max : 0));
      }
      CHECK(seen.size() == g.internal_arcs(s).size());
    }
    CHECK_THROWS_AS((void)arcs_at(g, "nope", 0), UnknownStation);
  }

  TEST_CASE("charged energy") {
    CHECK(charged_energy(0, 10.0, 1.0) == 0.0);
    CHECK(charged_energy(4, 10.0, 1.0) == 40.0);
    CHECK(charged_energy(3, 5.0, 0.5) == 7.5);
    static_assert(charged_energy(2, 20.0, 1.0) == 40.0);
  }

  TEST_CASE("dummy arcs inherit the station edge data") {
    const PtenGraph g = expand(make(toy_data()));
    const Instance& inst = g.instance();
    const auto& c1_f1 = inst.edge(inst.customer_base(0), inst.station_base(0));
    for (int t = 0; t < inst.horizon(); ++t) {
      const auto d = g.dummy(0, t, 1);
      REQUIRE(d.has_value());
      const auto a = g.find_arc(g.customer_node(0), *d);
      REQUIRE(a.has_value());
      CHECK(g.arc(*a).distance == c1_f1->distance);
      CHECK(g.arc(*a).travel_time == c1_f1->travel_time);
    }
  }

  TEST_CASE("no candidate stations") {
    InstanceData d = testing::random_instance(3);
    d.stations.clear();
    d.economics.service_fee.clear();
    d.edges.erase(std::remove_if(d.edges.begin(), d.edges.end(),
                                 [](const Edge& e) { return e.from[0] == 'F' || e.to[0] == 'F'; }),
                  d.edges.end());
    const PtenGraph g = expand(make(d));
    CHECK(g.num_nodes() == 2 + static_cast<int>(d.customers.size()));
    for (const PtenArc& a : g.arcs()) CHECK_FALSE(a.internal);
  }

  TEST_CASE("a candidate without ports is rejected") {
    InstanceData d = toy_data();
    d.stations[0].size_min = 0;
    d.stations[0].size_max = 0;
    CHECK_THROWS_AS((void)expand(make(d)), CapacityError);
  }

  TEST_CASE("expansion is deterministic") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto inst = make(testing::random_instance(seed));
      CHECK(dump_graph(expand(inst)) == dump_graph(expand(inst)));
    }
  }
}
