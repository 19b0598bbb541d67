#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "elrp/errors.hpp"
#include "elrp/experiment.hpp"
#include "support/random_models.hpp"

using namespace elrp;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return testing::data_dir() + "/" + name; }

Instance toy() { return load_instance(data("toy.json")); }

// Route identity without port labels, built from node names.
std::multiset<std::string> plan_shape(const PtenGraph& g, const FleetPlan& plan) {
  std::multiset<std::string> out;
  for (const Route& r : plan.routes) {
    std::string s = std::to_string(r.vehicle_type);
    for (int n : r.nodes) {
      const PtenNode& node = g.node(n);
      s += node.kind == NodeKind::StationDummy
               ? " " + g.instance().stations()[static_cast<std::size_t>(node.station)].id + "/" +
                     std::to_string(node.time)
               : " " + node.name;
    }
    out.insert(s);
  }
  return out;
}

int run(const std::string& args) {
  const std::string cmd = std::string(ELRP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("elrp_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("fee grids") {
    const auto grid = parse_fee_grid("0:0.5:0.05");
    REQUIRE(grid.size() == 11);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(grid[i] == doctest::Approx(0.05 * static_cast<double>(i)));
    CHECK(grid.back() == 0.5);
    CHECK(parse_fee_grid("0:0.5:0.025").size() == 21);
    CHECK(parse_fee_grid("0.1, 0.125,0.3") == std::vector<double>{0.1, 0.125, 0.3});
    CHECK(parse_fee_grid("0.2") == std::vector<double>{0.2});
    CHECK(parse_fee_grid("0.1:0.1:1") == std::vector<double>{0.1});
    for (const char* bad : {"", "a", "0:1", "0:1:0", "1:0:0.1", "-0.1", "11", "0,,1", "0:1:x"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS((void)parse_fee_grid(bad), DomainError);
    }
  }

  TEST_CASE("number lists") {
    CHECK(parse_number_list("10,15,20") == std::vector<double>{10, 15, 20});
    CHECK(parse_number_list("7.5") == std::vector<double>{7.5});
    for (const char* bad : {"", "0", "10,-5", "ten", "10,"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS((void)parse_number_list(bad), DomainError);
    }
  }

  TEST_CASE("solve reports") {
    const SolveReport a = run_solve(toy());
    const SolveReport b = run_solve(toy());
    CHECK(a.solution_csv == b.solution_csv);
    CHECK(a.summary_csv == b.summary_csv);
    CHECK(a.iterations_csv == b.iterations_csv);
    CHECK(a.solution_csv.rfind("route,vehicle_type,step,node,kind,station,port,time,load_after,energy_after\n", 0) == 0);
    CHECK(a.summary_csv.rfind("instance,fee,lb,ub,gap,iterations,leader_cost,follower_cost,", 0) == 0);
    CHECK(a.iterations_csv.rfind("iter,LB,UB,gap,n_scenarios,sp2_feasible\n", 0) == 0);
    std::istringstream lines(a.summary_csv);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(row.rfind("toy,F1=0.125000,", 0) == 0);
  }

  TEST_CASE("cost breakdown adds up") {
    const Instance inst = toy();
    const SolveReport rep = run_solve(inst);
    const CostBreakdown c = breakdown(inst, rep.result.decision, rep.result.plan);
    CHECK(c.fo_cost() == rep.result.follower_cost);
    CHECK(c.fo_cost() == fo_cost(rep.result.plan));
    CHECK(c.csp_cost() == csp_cost(inst, rep.result.decision, rep.result.plan));
    CHECK(c.capex == rep.result.decision.capex(inst));
  }

  TEST_CASE("sweep rows: revenue is fee times energy sold") {
    const Instance base = toy();
    const auto fees = parse_fee_grid("0:0.5:0.125");
    const auto rows = run_fee_sweep(base, fees);
    REQUIRE(rows.size() == fees.size());
    const double days = base.economics().operating_days;
    for (const SweepRow& r : rows) {
      CAPTURE(r.fee);
      REQUIRE(r.ok);
      CHECK(r.error.empty());
      const Instance at = with_overrides(base, InstancePatch::uniform_fee(base, r.fee));
      const Money capex = LeaderDecision::with_ports(at, {r.ports}).capex(at);
      const Money revenue = capex - r.csp_cost;
      CHECK(std::abs(revenue.value() - r.fee * r.energy * days) <= 1e-5);
      CHECK(r.total() == r.fo_cost + r.csp_cost);
      CHECK(r.se_ok);
      // The single decision maker can always copy the game outcome.
      CHECK(r.se_total <= r.total());
      CHECK(r.se_total == r.se_fo_cost + r.se_csp_cost);
    }
    CHECK(sweep_csv(rows).rfind("fee,fo_cost,csp_cost,csp_profit,total,stations_built,ports,total_energy_sold,", 0) == 0);
  }

  TEST_CASE("sweep output does not depend on the number of jobs") {
    const Instance base = toy();
    const auto fees = parse_fee_grid("0,0.1,0.2,0.3");
    SweepOptions one;
    SweepOptions many;
    many.jobs = 3;
    CHECK(sweep_csv(run_fee_sweep(base, fees, one)) == sweep_csv(run_fee_sweep(base, fees, many)));
  }

  TEST_CASE("equal strategy hashes mean equal plans") {
    std::map<std::uint64_t, std::multiset<std::string>> seen;
    auto record = [&](const PtenGraph& g, const FleetPlan& plan) {
      const auto h = strategy_hash(g, plan);
      const auto shape = plan_shape(g, plan);
      auto [it, fresh] = seen.emplace(h, shape);
      if (!fresh) CHECK(it->second == shape);
    };
    const Instance base = toy();
    for (double fee : {0.0, 0.05, 0.1, 0.125, 0.2, 0.3, 1.0}) {
      const auto inst = std::make_shared<const Instance>(with_overrides(base, InstancePatch::uniform_fee(base, fee)));
      const PtenGraph g = expand(inst);
      const CcgResult r = run_ccg(g);
      record(g, r.plan);
      record(g, assign_ports(g, r.plan));
    }
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const PtenGraph g = expand(std::make_shared<const Instance>(testing::random_instance(seed)));
      try {
        record(g, run_ccg(g).plan);
      } catch (const InfeasibleError&) {
      }
    }
    CHECK(seen.size() >= 3);
  }

  TEST_CASE("repeated rates give identical rows") {
    const Instance base = toy();
    RateOptions opt;
    opt.jobs = 2;
    const auto rows = run_rate_study(base, {10.0, 20.0, 10.0}, opt);
    REQUIRE(rows.size() == 3);
    const std::string text = rates_csv(rows);
    std::istringstream lines(text);
    std::vector<std::string> v;
    for (std::string l; std::getline(lines, l);) v.push_back(l);
    REQUIRE(v.size() == 4);
    CHECK(v[0].rfind("rate,fee,fo_cost,fleet,travel,charging,csp_cost,capex,revenue,csp_profit,", 0) == 0);
    CHECK(v[1] == v[3]);
    CHECK(v[1].rfind("10.000000,0.125000,", 0) == 0);
    for (const RateRow& r : rows) CHECK(r.ok);
    RateOptions missing;
    missing.station = "F9";
    CHECK_THROWS_AS((void)run_rate_study(base, {10.0}, missing), UnknownStation);
  }

  TEST_CASE("oracle check agrees on the toy") {
    const auto rows = run_oracle_check(toy(), {0.0, 0.125, 0.3});
    for (const OracleCheckRow& r : rows) CHECK(r.match());
    CHECK(oracle_check_csv(rows).rfind("fee,ccg_leader,oracle_leader,ccg_follower,oracle_follower,iterations,match\n",
                                       0) == 0);
  }

  TEST_CASE("binary exit codes and outputs") {
    const std::string toy_path = data("toy.json");
    const fs::path out = scratch("solve");
    CHECK(run("solve --instance " + toy_path + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "solution.csv"));
    CHECK(fs::exists(out / "summary.csv"));
    CHECK(fs::exists(out / "iterations.csv"));
    const std::string first = slurp(out / "summary.csv");
    CHECK(run("solve --instance " + toy_path + " --out " + out.string()) == 0);
    CHECK(slurp(out / "summary.csv") == first);

    const fs::path sweep = scratch("sweep");
    CHECK(run("sweep --instance " + toy_path + " --fees 0,0.125 --jobs 2 --out " + sweep.string()) == 0);
    CHECK(fs::exists(sweep / "sweep.csv"));
    CHECK(run("rates --instance " + toy_path + " --rates 10,20 --out " + sweep.string()) == 0);
    CHECK(fs::exists(sweep / "rates.csv"));
    CHECK(run("oracle-check --instance " + toy_path + " --fee 0.125") == 0);
    CHECK(run("dump-graph --instance " + toy_path) == 0);

    CHECK(run("") == 2);
    CHECK(run("solve") == 2);
    CHECK(run("bogus --instance " + toy_path) == 2);
    CHECK(run("solve --instance /nonexistent/x.json") == 2);
    CHECK(run("sweep --instance " + toy_path + " --fees 0:1") == 2);
    CHECK(run("sweep --instance " + toy_path + " --jobs 0") == 2);
    CHECK(run("rates --instance " + toy_path + " --station F9") == 2);
    CHECK(run("solve --instance " + toy_path + " --fee -1") == 2);

    const fs::path bad = scratch("bad.json");
    {
      InstanceData d = toy().data();
      std::ofstream f(bad);
      f << serialize_instance(Instance(d));
    }
    std::string text = slurp(bad);
    text.replace(text.find("\"window\": ["), 11, "\"window\": [7, ");
    std::ofstream(bad) << text;
    CHECK(run("solve --instance " + bad.string()) == 2);
    text = slurp(data("toy.json"));
    text.replace(text.find("\"horizon\": 8"), 12, "\"horizon\": 2");
    std::ofstream(bad) << text;
    CHECK(run("solve --instance " + bad.string()) == 2);
    fs::remove(bad);
  }
}
