#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <set>

#include "elrp/oracle.hpp"
#include "elrp/spprc.hpp"
#include "support/random_models.hpp"

using namespace elrp;

namespace {

std::shared_ptr<const Instance> toy() { return std::make_shared<const Instance>(load_instance(testing::data_dir() + "/toy.json")); }

// Reduced cost written out from the route's money terms.
double direct_reduced_cost(const Route& r, const PricingContext& ctx) {
  double v = ctx.cost_weight * r.cost().value() + ctx.revenue_weight * r.owner_cost().value();
  for (std::size_t c = 0; c < ctx.cover_dual.size(); ++c) {
    if ((r.covered >> c) & 1U) v -= ctx.cover_dual[c];
  }
  for (auto [s, t] : r.charging_steps()) {
    if (!ctx.slot_dual.empty()) v += ctx.slot_dual[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
  }
  return v;
}

bool uses_closed(const Route& r, const PricingContext& ctx) {
  if (ctx.station_open.empty()) return false;
  for (const ChargingSession& s : r.sessions) {
    if (ctx.station_open[static_cast<std::size_t>(s.station)] == 0) return true;
  }
  return false;
}

double brute_force_min(const std::vector<Route>& routes, const PricingContext& ctx) {
  double best = std::numeric_limits<double>::infinity();
  for (const Route& r : routes) {
    if (uses_closed(r, ctx)) continue;
    best = std::min(best, direct_reduced_cost(r, ctx));
  }
  return best;
}

}  // namespace

TEST_SUITE("spprc") {
  TEST_CASE("zero duals give no improving route") {
    const PtenGraph g = expand(toy());
    PricingContext ctx;
    ctx.cover_dual.assign(2, 0.0);
    const PricingResult r = solve_pricing(g, ctx);
    CHECK(r.routes.empty());
    CHECK(std::isinf(r.best_reduced_cost));
  }

  TEST_CASE("toy: large customer duals price the charging route") {
    const PtenGraph g = expand(toy());
    PricingContext ctx;
    ctx.cover_dual.assign(2, 1e6);
    const PricingResult r = solve_pricing(g, ctx);
    REQUIRE_FALSE(r.routes.empty());
    const Route& best = r.routes.front();
    CHECK(best.covered == 0b11);
    CHECK(best.energy_purchased > 0.0);
    for (std::size_t i = 1; i < r.routes.size(); ++i) {
      CHECK(reduced_cost(r.routes[i - 1], ctx) <= reduced_cost(r.routes[i], ctx));
    }
  }

  TEST_CASE("single extensions") {
    const PtenGraph g = expand(toy());
    PricingContext ctx;
    ctx.cover_dual.assign(2, 0.0);
    const Labeler lab(g, ctx);
    const Label root = lab.root();
    const auto a = g.find_arc(g.depot(), g.customer_node(0));
    REQUIRE(a.has_value());
    const auto l = lab.extend(root, *a);
    REQUIRE(l.has_value());
    CHECK(l->load == 50.0);
    CHECK(l->n_visited == 1);
    CHECK(l->time == 1);
    CHECK(l->energy_used == 10.0);

    // Into slot 1 of F1 from C1: arrival at 2 is too late.
    const auto late = g.find_arc(g.customer_node(0), *g.dummy(0, 1, 1));
    REQUIRE(late.has_value());
    CHECK_FALSE(lab.extend(*l, *late).has_value());

    // C1 -> C2 -> C1 would revisit a customer; C1 -> C2 -> sink depletes the battery.
    const auto c12 = g.find_arc(g.customer_node(0), g.customer_node(1));
    const auto l2 = lab.extend(*l, *c12);
    REQUIRE(l2.has_value());
    CHECK(l2->energy_used == 30.0);
    CHECK_FALSE(lab.extend(*l2, *g.find_arc(g.customer_node(1), g.sink())).has_value());
  }

  TEST_CASE("dominance relation") {
    const PtenGraph g = expand(toy());
    PricingContext ctx;
    ctx.cover_dual.assign(2, 0.0);
    const Labeler lab(g, ctx);
    Label a;
    a.node = g.customer_node(1);
    a.cost = 10.0;
    a.energy_used = 20.0;
    a.time = 2;
    a.visited = 0b10;
    Label b = a;
    CHECK(lab.dominates(a, b));
    CHECK(lab.dominates(b, a));
    b.cost = 12.0;
    b.visited = 0b11;
    CHECK(lab.dominates(a, b));
    CHECK_FALSE(lab.dominates(b, a));
    Label cheap = a;
    cheap.cost = 5.0;
    cheap.energy_used = 30.0;
    CHECK_FALSE(lab.dominates(cheap, a));
    CHECK_FALSE(lab.dominates(a, cheap));
    Label elsewhere = a;
    elsewhere.node = g.customer_node(0);
    CHECK_FALSE(lab.dominates(a, elsewhere));
  }

  TEST_CASE("pricing matches brute-force enumeration") {
    int compared = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      CAPTURE(seed);
      const auto inst = std::make_shared<const Instance>(testing::random_instance(seed));
      const PtenGraph g = expand(inst);
      for (int k = 0; k < inst->num_vehicle_types(); ++k) {
        const auto routes = oracle::enumerate_routes(g, k);
        PricingContext ctx = testing::random_context(seed * 31 + static_cast<std::uint64_t>(k), *inst, k);
        if (seed % 5 == 0 && inst->num_stations() > 0) {
          ctx.station_open.assign(static_cast<std::size_t>(inst->num_stations()), 1);
          ctx.station_open[0] = 0;
        }
        const double want = brute_force_min(routes, ctx);
        const PricingResult got = solve_pricing(g, ctx);
        if (want < ctx.threshold) {
          REQUIRE_FALSE(got.routes.empty());
          CHECK(std::abs(got.best_reduced_cost - want) <= 1e-9 * std::max(1.0, std::abs(want)));
          for (const Route& r : got.routes) {
            CHECK(std::abs(reduced_cost(r, ctx) - direct_reduced_cost(r, ctx)) <= 1e-9 * std::max(1.0, std::abs(want)));
            CHECK(reduced_cost(r, ctx) < ctx.threshold);
            CHECK_FALSE(uses_closed(r, ctx));
          }
        } else {
          CHECK(got.routes.empty());
        }
        ++compared;
      }
    }
    CHECK(compared >= 100);
  }

  TEST_CASE("dominance on and off agree") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      CAPTURE(seed);
      const auto inst = std::make_shared<const Instance>(testing::random_instance(seed));
      const PtenGraph g = expand(inst);
      for (int k = 0; k < inst->num_vehicle_types(); ++k) {
        PricingContext on = testing::random_context(seed + 1000, *inst, k);
        PricingContext off = on;
        off.dominance = false;
        const PricingResult a = solve_pricing(g, on);
        const PricingResult b = solve_pricing(g, off);
        CHECK(a.best_reduced_cost == b.best_reduced_cost);
        CHECK(a.stats.labels_created <= b.stats.labels_created);
        CHECK(b.stats.labels_dominated == 0);
      }
    }
  }

  TEST_CASE("unpruned labeling reaches every enumerated route") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      CAPTURE(seed);
      const auto inst = std::make_shared<const Instance>(testing::random_instance(seed));
      const PtenGraph g = expand(inst);
      for (int k = 0; k < inst->num_vehicle_types(); ++k) {
        PricingContext ctx;
        ctx.vehicle_type = k;
        ctx.cover_dual.assign(static_cast<std::size_t>(inst->num_customers()), 0.0);
        ctx.threshold = std::numeric_limits<double>::infinity();
        ctx.dominance = false;
        const PricingResult got = solve_pricing(g, ctx);
        const auto want = oracle::enumerate_routes(g, k);
        std::set<std::vector<int>> a;
        std::set<std::vector<int>> b;
        for (const Route& r : got.routes) CHECK(a.insert(r.nodes).second);
        for (const Route& r : want) b.insert(r.nodes);
        CHECK(a == b);
      }
    }
  }

  TEST_CASE("route cap keeps the most negative routes") {
    const auto inst = std::make_shared<const Instance>(testing::random_instance(4));
    const PtenGraph g = expand(inst);
    PricingContext ctx = testing::random_context(4, *inst, 0);
    for (double& d : ctx.cover_dual) d *= 4.0;
    const PricingResult all = solve_pricing(g, ctx);
    ctx.max_routes = 2;
    const PricingResult capped = solve_pricing(g, ctx);
    CHECK(capped.routes.size() == std::min<std::size_t>(2, all.routes.size()));
    CHECK(capped.best_reduced_cost == all.best_reduced_cost);
  }

  TEST_CASE("pricing is deterministic") {
    const auto inst = std::make_shared<const Instance>(testing::random_instance(12));
    const PtenGraph g = expand(inst);
    const PricingContext ctx = testing::random_context(12, *inst, 0);
    const PricingResult a = solve_pricing(g, ctx);
    const PricingResult b = solve_pricing(g, ctx);
    REQUIRE(a.routes.size() == b.routes.size());
    for (std::size_t i = 0; i < a.routes.size(); ++i) CHECK(a.routes[i].nodes == b.routes[i].nodes);
  }
}
