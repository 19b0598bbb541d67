#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "elrp/colgen.hpp"
#include "elrp/errors.hpp"
#include "elrp/oracle.hpp"
#include "support/random_models.hpp"

using namespace elrp;

namespace {

std::shared_ptr<const Instance> toy() {
  return std::make_shared<const Instance>(load_instance(testing::data_dir() + "/toy.json"));
}

// Compares the follower and leader masters with the oracle at every leader grid
// point. Returns how many leader-master plans charge at all.
int check_against_oracle(const PtenGraph& g) {
  int charging = 0;
  const Instance& inst = g.instance();
  const auto routes = oracle::enumerate_all_routes(g);
  ColumnPool pool;
  for (const auto& ports : oracle::leader_grid(inst)) {
    CAPTURE(inst.name());
    const LeaderDecision dec = LeaderDecision::with_ports(inst, ports);
    std::optional<oracle::PlanChoice> fleet;
    try {
      fleet = oracle::best_fleet_plan(g, routes, dec);
    } catch (const InfeasibleError&) {
    }
    const MasterSpec follower{MasterKind::Follower, ports, std::nullopt};
    const IntegerResult sp1 = solve_master(g, follower, pool);
    REQUIRE(sp1.feasible == fleet.has_value());
    if (!fleet) continue;
    CHECK(Money::from_double(sp1.objective) == fleet->fo_cost);
    CHECK(fo_cost(sp1.plan) == fleet->fo_cost);
    CHECK(check_joint_feasibility(g, dec, sp1.plan).empty());

    const MasterSpec leader{MasterKind::Leader, ports, fleet->fo_cost.value() + 1e-6};
    const IntegerResult sp2 = solve_master(g, leader, pool);
    const auto owner = oracle::best_owner_plan(g, routes, dec, fleet->fo_cost);
    REQUIRE(owner.has_value());
    REQUIRE(sp2.feasible);
    CHECK(Money::from_double(sp2.objective) == owner->owner_cost);
    CHECK(fo_cost(sp2.plan) <= fleet->fo_cost);
    CHECK(check_joint_feasibility(g, dec, sp2.plan).empty());
    if (energy_sold(sp2.plan) > 0.0) ++charging;
  }
  return charging;
}

}  // namespace

TEST_SUITE("colgen") {
  TEST_CASE("pool ignores port relabelling") {
    const PtenGraph g = expand(toy());
    const auto routes = oracle::enumerate_all_routes(g);
    ColumnPool pool;
    for (const Route& r : routes) CHECK(pool.add(g, r));
    for (const Route& r : routes) CHECK_FALSE(pool.add(g, r));
    CHECK(pool.size() == routes.size());
    // The same route moved to port 2 is a duplicate.
    for (const Route& r : routes) {
      if (r.sessions.empty()) continue;
      std::vector<int> moved;
      for (int v : r.nodes) {
        const PtenNode& n = g.node(v);
        moved.push_back(n.kind == NodeKind::StationDummy ? g.dummy(n.station, n.time, 2).value() : v);
      }
      CHECK(pool.contains(g, simulate_route(g, r.vehicle_type, moved)));
      break;
    }
  }

  TEST_CASE("pricing context reproduces master reduced costs") {
    const PtenGraph g = expand(toy());
    const auto routes = oracle::enumerate_all_routes(g);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const PricingContext rnd = testing::random_context(seed, g.instance(), 0);
      DualPrices d{rnd.cover_dual, rnd.slot_dual, 0.25 * static_cast<double>(seed % 4)};
      const MasterSpec f{MasterKind::Follower, {2}, std::nullopt};
      const MasterSpec l{MasterKind::Leader, {2}, 1e9};
      for (const Route& r : routes) {
        CHECK(reduced_cost(r, pricing_context(f, d, 0)) == doctest::Approx(reduced_cost_mp1(r, d)));
        CHECK(reduced_cost(r, pricing_context(l, d, 0)) == doctest::Approx(reduced_cost_mp0(r, d)));
      }
    }
  }

  TEST_CASE("admissibility follows open stations and port counts") {
    const PtenGraph g = expand(toy());
    for (const Route& r : oracle::enumerate_all_routes(g)) {
      CHECK(admissible(r, MasterSpec{MasterKind::Follower, {0}, {}}) == r.sessions.empty());
      CHECK(admissible(r, MasterSpec{MasterKind::Follower, {1}, {}}));
    }
  }

  TEST_CASE("toy masters match the oracle") { CHECK(check_against_oracle(expand(toy())) > 0); }

  TEST_CASE("random instances: masters match the oracle") {
    int charging = 0;
    for (std::uint64_t seed = 1; seed <= 80; ++seed) {
      CAPTURE(seed);
      charging += check_against_oracle(expand(std::make_shared<const Instance>(testing::random_instance(seed))));
    }
    MESSAGE("leader plans with charging: ", charging);
    CHECK(charging >= 10);
  }

  TEST_CASE("stabilized and plain column generation give the same bound") {
    for (std::uint64_t seed = 100; seed <= 115; ++seed) {
      CAPTURE(seed);
      const PtenGraph g = expand(std::make_shared<const Instance>(testing::random_instance(seed)));
      for (const auto& ports : oracle::leader_grid(g.instance())) {
        const MasterSpec spec{MasterKind::Joint, ports, std::nullopt};
        ColumnPool a;
        ColumnPool b;
        ColgenOptions on;
        ColgenOptions off;
        off.stabilization.enabled = false;
        const ColgenResult ra = run_column_generation(g, spec, a, on);
        const ColgenResult rb = run_column_generation(g, spec, b, off);
        CHECK(ra.lp_bound == doctest::Approx(rb.lp_bound).epsilon(1e-9));
        CHECK(ra.lp_feasible == rb.lp_feasible);
        // The certified duals price out every route.
        for (int k = 0; k < g.instance().num_vehicle_types(); ++k) {
          CHECK(solve_pricing(g, pricing_context(spec, ra.duals, k)).routes.empty());
        }
      }
    }
  }

  TEST_CASE("parallel pricing matches the serial loop") {
    std::vector<std::shared_ptr<const Instance>> insts{
        std::make_shared<const Instance>(load_instance(testing::data_dir() + "/small_base.json"))};
    for (std::uint64_t seed = 200; seed <= 210; ++seed) {
      insts.push_back(std::make_shared<const Instance>(testing::random_instance(seed)));
    }
    for (const auto& inst : insts) {
      CAPTURE(inst->name());
      const PtenGraph g = expand(inst);
      for (const auto& ports : oracle::leader_grid(*inst)) {
        const MasterSpec spec{MasterKind::Follower, ports, std::nullopt};
        ColumnPool a;
        ColumnPool b;
        ColgenOptions serial;
        serial.parallel_pricing = false;
        ColgenOptions parallel;
        parallel.parallel_pricing = true;
        const ColgenResult ra = run_column_generation(g, spec, a, serial);
        const ColgenResult rb = run_column_generation(g, spec, b, parallel);
        CHECK(ra.lp_bound == rb.lp_bound);
        CHECK(ra.log.size() == rb.log.size());
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.routes()[i].nodes == b.routes()[i].nodes);
      }
    }
  }

  TEST_CASE("iteration cap raises IterationLimit") {
    const PtenGraph g = expand(toy());
    ColumnPool pool;
    ColgenOptions opt;
    opt.max_iterations = 1;
    opt.routes_per_pricing = 1;
    CHECK_THROWS_AS((void)run_column_generation(g, MasterSpec{MasterKind::Follower, {1}, {}}, pool, opt),
                    IterationLimit);
  }

  TEST_CASE("iteration log columns") {
    const PtenGraph g = expand(toy());
    ColumnPool pool;
    const ColgenResult r = run_column_generation(g, MasterSpec{MasterKind::Follower, {1}, {}}, pool);
    const std::string text = format_iteration_log(r.log);
    CHECK(text.rfind("iter,lp_obj,best_phi_per_type,pool_size,box_width\n", 0) == 0);
    CHECK(r.log.back().pool_size == pool.size());
  }

  TEST_CASE("integer master writes named rows") {
    const PtenGraph g = expand(toy());
    ColumnPool pool;
    for (const Route& r : oracle::enumerate_all_routes(g)) pool.add(g, r);
    const lp::Model m = build_master(g, MasterSpec{MasterKind::Leader, {2}, 5000.0}, pool, true);
    const std::string text = lp::write_lp(m);
    CHECK(text.find("cov_C1:") != std::string::npos);
    CHECK(text.find("cap_F1_") != std::string::npos);
    CHECK(text.find("beta_cap:") != std::string::npos);
  }
}
