#include <doctest.h>

#include <cmath>
#include <functional>

#include "elrp/errors.hpp"
#include "elrp/mathprog.hpp"
#include "support/dense_tableau.hpp"
#include "support/lp_oracle.hpp"
#include "support/random_models.hpp"

using namespace elrp;
using namespace elrp::lp;

using testing::dual_objective;
using testing::dual_signs_ok;
using testing::enumerate_ip;

TEST_SUITE("mathprog") {
  TEST_CASE("single lower-bounded variable") {
    Model m;
    const int x = m.add_column("x", 0.0, kInf, 1.0);
    const int r = m.add_row("r", Sense::Ge, 3.0);
    m.add_coef(r, x, 1.0);
    const Solution s = solve_lp(m);
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.primal[0] == doctest::Approx(3.0));
    CHECK(s.duals[0] == doctest::Approx(1.0));
    CHECK(s.objective == doctest::Approx(3.0));
  }

  TEST_CASE("contradicting rows are infeasible") {
    Model m;
    const int x = m.add_column("x", -kInf, kInf, 0.0);
    m.add_coef(m.add_row("a", Sense::Le, 0.0), x, 1.0);
    m.add_coef(m.add_row("b", Sense::Ge, 1.0), x, 1.0);
    CHECK(solve_lp(m).status == Status::Infeasible);
  }

  TEST_CASE("unbounded direction is reported") {
    Model m;
    const int x = m.add_column("x", 0.0, kInf, -1.0);
    const int y = m.add_column("y", 0.0, kInf, 0.0);
    const int r = m.add_row("r", Sense::Le, 1.0);
    m.add_coef(r, y, 1.0);
    m.add_coef(r, x, 0.0);
    CHECK(solve_lp(m).status == Status::Unbounded);
  }

  TEST_CASE("free variables and equality rows") {
    Model m;
    const int x = m.add_column("x", -kInf, kInf, 1.0);
    const int y = m.add_column("y", -kInf, kInf, 2.0);
    const int e = m.add_row("e", Sense::Eq, 4.0);
    m.add_coef(e, x, 1.0);
    m.add_coef(e, y, 1.0);
    const int g = m.add_row("g", Sense::Ge, -10.0);
    m.add_coef(g, x, -1.0);
    const Solution s = solve_lp(m);
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.primal[0] == doctest::Approx(10.0));
    CHECK(s.primal[1] == doctest::Approx(-6.0));
    CHECK(s.objective == doctest::Approx(-2.0));
  }

  TEST_CASE("random LPs agree with the dense tableau and satisfy strong duality") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
      const Model m = testing::random_lp(seed, 20, 40);
      const Solution s = solve_lp(m);
      const testing::TableauResult ref = testing::tableau_solve(m);
      REQUIRE(s.status == Status::Optimal);
      REQUIRE(ref.status == Status::Optimal);
      CHECK(s.objective == doctest::Approx(ref.objective).epsilon(1e-9));
      CHECK(std::abs(s.objective - dual_objective(m, s)) <= 1e-7);
      CHECK(dual_signs_ok(m, s));
    }
  }

  TEST_CASE("solving twice gives identical bytes") {
    const Model m = testing::random_lp(7, 15, 30);
    const Solution a = solve_lp(m);
    const Solution b = solve_lp(m);
    CHECK(a.primal == b.primal);
    CHECK(a.duals == b.duals);
  }

  TEST_CASE("knapsack matches enumeration") {
    Model m;
    const double w[] = {3, 4, 5, 8, 9};
    const double v[] = {4, 5, 7, 10, 13};
    const int r = m.add_row("cap", Sense::Le, 17);
    for (int j = 0; j < 5; ++j) {
      const int c = m.add_column("item" + std::to_string(j), 0, 1, -v[j], true);
      m.add_coef(r, c, w[j]);
    }
    bool feasible = false;
    const double best = enumerate_ip(m, feasible);
    const Solution s = solve_milp(m);
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.objective == doctest::Approx(best));
  }

  TEST_CASE("integral relaxation needs no branching") {
    Model m;
    const int x = m.add_column("x", 0, 5, 1.0, true);
    m.add_coef(m.add_row("r", Sense::Ge, 2.0), x, 1.0);
    const Solution s = solve_milp(m);
    CHECK(s.nodes == 1);
    CHECK(s.primal[0] == 2.0);
  }

  TEST_CASE("random integer programs match enumeration") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const Model m = testing::random_ip(seed, 8 + static_cast<int>(seed % 5));
      bool feasible = false;
      const double best = enumerate_ip(m, feasible);
      const Solution s = solve_milp(m);
      CAPTURE(seed);
      if (!feasible) {
        CHECK(s.status == Status::Infeasible);
        continue;
      }
      REQUIRE(s.status == Status::Optimal);
      CHECK(s.objective == doctest::Approx(best).epsilon(1e-9));
    }
  }

  TEST_CASE("unbounded integer columns are rejected") {
    Model m;
    m.add_column("n", 0, kInf, 1.0, true);
    CHECK_THROWS_AS((void)solve_milp(m), DomainError);
  }

  TEST_CASE("LP text uses the row names") {
    Model m;
    const int x = m.add_column("route_1", 0, 1, 2.5);
    m.add_coef(m.add_row("cov_C1", Sense::Eq, 1.0), x, 1.0);
    m.add_coef(m.add_row("cap_F1_3", Sense::Le, 2.0), x, 1.0);
    const std::string text = write_lp(m);
    CHECK(text.find("cov_C1: route_1 = 1") != std::string::npos);
    CHECK(text.find("cap_F1_3: route_1 <= 2") != std::string::npos);
    CHECK(text.find("Minimize") == 0);
  }
}
