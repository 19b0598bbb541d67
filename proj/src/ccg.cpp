#include "elrp/ccg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "elrp/errors.hpp"
#include "elrp/log.hpp"
#include "elrp/oracle.hpp"

namespace elrp {

namespace {

constexpr double kCapTolerance = 1e-6;

std::int64_t cap_key(std::optional<double> cap) {
  return cap ? Money::from_double(*cap).micros() : std::numeric_limits<std::int64_t>::min();
}

std::string fmt_bound(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.6f}", v);
}

}  // namespace

Scenario Scenario::from_plan(const Instance& instance, int index, FleetPlan plan) {
  Scenario z;
  z.index = index;
  z.fo_cost = elrp::fo_cost(plan);
  z.usage.assign(static_cast<std::size_t>(instance.num_stations()),
                 std::vector<int>(static_cast<std::size_t>(instance.horizon()), 0));
  for (const Route& r : plan.routes) {
    for (auto [s, t] : r.charging_steps()) ++z.usage[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
  }
  z.plan = std::move(plan);
  return z;
}

bool Scenario::executable(const std::vector<int>& ports) const {
  for (std::size_t s = 0; s < usage.size(); ++s) {
    const int open = s < ports.size() ? ports[s] : 0;
    for (int n : usage[s]) {
      if (n > open) return false;
    }
  }
  return true;
}

CcgSolver::CcgSolver(const PtenGraph& graph, CcgOptions options)
    : graph_(&graph), options_(std::move(options)), grid_(oracle::leader_grid(graph.instance())) {}

CcgSolver::Cached& CcgSolver::leader_master(const std::vector<int>& ports, std::optional<double> cap,
                                            bool need_integer) {
  auto key = std::make_pair(ports, cap_key(cap));
  auto it = leader_cache_.find(key);
  const MasterSpec spec{MasterKind::Leader, ports, cap};
  if (it == leader_cache_.end()) {
    Cached c;
    c.lp = run_column_generation(*graph_, spec, pool_, options_.colgen);
    it = leader_cache_.emplace(std::move(key), std::move(c)).first;
  }
  if (need_integer && !it->second.integer) it->second.integer = integerize(*graph_, spec, pool_, it->second.lp);
  return it->second;
}

Sp0Result CcgSolver::solve_sp0(const CcgState& state) {
  const Instance& inst = graph_->instance();
  struct Candidate {
    std::size_t grid = 0;
    std::optional<double> cap;
    Money capex;
    double bound = 0.0;
  };
  std::vector<Candidate> cands;
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    Candidate c;
    c.grid = g;
    for (const Scenario& z : state.scenarios) {
      if (!z.executable(grid_[g])) continue;
      const double cap = z.fo_cost.value() + kCapTolerance;
      c.cap = c.cap ? std::min(*c.cap, cap) : cap;
    }
    c.capex = LeaderDecision::with_ports(inst, grid_[g]).capex(inst);
    c.bound = c.capex.value() + leader_master(grid_[g], c.cap, false).lp.lp_bound;
    cands.push_back(c);
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.bound < b.bound; });

  std::optional<Sp0Result> best;
  for (const Candidate& c : cands) {
    if (best) {
      const double tol = 1e-7 * std::max(1.0, std::abs(best->objective.value()));
      if (c.bound - tol >= best->objective.value()) break;
    }
    const Cached& m = leader_master(grid_[c.grid], c.cap, true);
    if (!m.integer->feasible) continue;
    const Money value = c.capex + Money::from_double(m.integer->objective);
    if (!best || value < best->objective) {
      best = Sp0Result{LeaderDecision::with_ports(inst, grid_[c.grid]), m.integer->plan, value};
    }
  }
  if (!best) throw InfeasibleError("no leader decision lets the fleet serve every customer");
  return *best;
}

Sp1Result CcgSolver::solve_sp1(const LeaderDecision& decision) {
  const MasterSpec spec{MasterKind::Follower, decision.ports, std::nullopt};
  const IntegerResult r = solve_master(*graph_, spec, pool_, options_.colgen);
  if (!r.feasible) throw InfeasibleError("fleet cannot serve every customer under the leader decision");
  return Sp1Result{r.plan, fo_cost(r.plan)};
}

std::optional<Sp2Result> CcgSolver::solve_sp2(const LeaderDecision& decision, Money theta1) {
  const Cached& m = leader_master(decision.ports, theta1.value() + kCapTolerance, true);
  if (!m.integer->feasible) return std::nullopt;
  const Instance& inst = graph_->instance();
  return Sp2Result{m.integer->plan, csp_cost(inst, decision, m.integer->plan), fo_cost(m.integer->plan)};
}

CcgResult CcgSolver::run() {
  const Instance& inst = graph_->instance();
  CcgState st;
  CcgResult res;
  while (true) {
    ++st.iteration;
    if (st.iteration > options_.max_iterations) {
      throw IterationLimit(fmt::format("ccg stopped after {} iterations (LB {}, UB {})", options_.max_iterations,
                                       fmt_bound(st.lb), fmt_bound(st.ub)),
                           st.lb, st.ub);
    }
    const Sp0Result sp0 = solve_sp0(st);
    st.lb = std::max(st.lb, sp0.objective.value());
    const Sp1Result sp1 = solve_sp1(sp0.decision);
    const auto sp2 = solve_sp2(sp0.decision, sp1.fleet_cost);
    if (sp2 && sp2->leader_cost.value() < st.ub) {
      st.ub = sp2->leader_cost.value();
      st.incumbent = std::make_pair(sp0.decision, sp2->plan);
    }
    st.scenarios.push_back(
        Scenario::from_plan(inst, static_cast<int>(st.scenarios.size()), sp2 ? sp2->plan : sp1.plan));
    st.epsilon = options_.epsilon.value_or(1e-4 * std::max(1.0, std::abs(st.ub)));

    CcgIteration row;
    row.iter = st.iteration;
    row.lb = st.lb;
    row.ub = st.ub;
    row.gap = st.ub - st.lb;
    row.n_scenarios = st.scenarios.size();
    row.sp2_feasible = sp2.has_value();
    row.decision = sp0.decision;
    res.log.push_back(row);
    if (options_.trace) {
      log().info("ccg iter={} LB={} UB={} gap={} scenarios={} pool={}", row.iter, fmt_bound(row.lb),
                 fmt_bound(row.ub), fmt_bound(row.gap), row.n_scenarios, pool_.size());
    }
    if (st.incumbent && row.gap <= st.epsilon) break;
  }
  res.decision = st.incumbent->first;
  res.plan = st.incumbent->second;
  res.leader_cost = csp_cost(inst, res.decision, res.plan);
  res.follower_cost = fo_cost(res.plan);
  res.lb = st.lb;
  res.ub = st.ub;
  res.iterations = st.iteration;
  return res;
}

CcgResult run_ccg(const PtenGraph& graph, const CcgOptions& options) {
  CcgSolver solver(graph, options);
  return solver.run();
}

CcgResult run_ccg(std::shared_ptr<const Instance> instance, const CcgOptions& options) {
  const PtenGraph graph = expand(std::move(instance));
  return run_ccg(graph, options);
}

std::string format_ccg_log(const std::vector<CcgIteration>& log) {
  std::ostringstream out;
  out << "iter,LB,UB,gap,n_scenarios,sp2_feasible\n";
  for (const CcgIteration& row : log) {
    out << fmt::format("{},{},{},{},{},{}\n", row.iter, fmt_bound(row.lb), fmt_bound(row.ub), fmt_bound(row.gap),
                       row.n_scenarios, row.sp2_feasible ? 1 : 0);
  }
  return out.str();
}

Sp0Milp build_sp0_milp(const PtenGraph& graph, const std::vector<Route>& routes,
                       const std::vector<Scenario>& scenarios) {
  const Instance& inst = graph.instance();
  const double zeta = inst.station_life_factor();
  Sp0Milp out;
  lp::Model& m = out.model;

  for (int i = 0; i < inst.num_stations(); ++i) {
    const StationCandidate& s = inst.stations()[static_cast<std::size_t>(i)];
    const int build = m.add_column(fmt::format("build_{}", s.id), 0, 1, 0.0, true);
    const int ports = m.add_column(fmt::format("ports_{}", s.id), 0, s.size_max, zeta * s.port_cost, true);
    const int upgrade = m.add_column(fmt::format("upgrade_{}", s.id), 0, lp::kInf, zeta * s.upgrade_cost);
    out.port_columns.push_back(ports);
    const int hi = m.add_row(fmt::format("size_max_{}", s.id), lp::Sense::Le, 0.0);
    m.add_coef(hi, ports, 1.0);
    m.add_coef(hi, build, -s.size_max);
    const int lo = m.add_row(fmt::format("size_min_{}", s.id), lp::Sense::Ge, 0.0);
    m.add_coef(lo, ports, 1.0);
    m.add_coef(lo, build, -std::max(1, s.size_min));
    const int grid = m.add_row(fmt::format("grid_{}", s.id), lp::Sense::Ge, -s.min_grid_capacity());
    m.add_coef(grid, upgrade, 1.0);
    m.add_coef(grid, ports, -s.rated_power);
  }

  std::vector<int> cover;
  for (const Customer& c : inst.customers()) cover.push_back(m.add_row("cov_" + c.id, lp::Sense::Eq, 1.0));
  std::vector<std::vector<int>> cap(static_cast<std::size_t>(inst.num_stations()),
                                    std::vector<int>(static_cast<std::size_t>(inst.horizon()), -1));
  for (int i = 0; i < inst.num_stations(); ++i) {
    for (int t = 0; t < inst.horizon(); ++t) {
      if (!graph.has_charging_slot(i, t)) continue;
      const int row = m.add_row(fmt::format("cap_{}_{}", inst.stations()[static_cast<std::size_t>(i)].id, t),
                                lp::Sense::Le, 0.0);
      m.add_coef(row, out.port_columns[static_cast<std::size_t>(i)], -1.0);
      cap[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] = row;
    }
  }
  double max_cost = 0.0;
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const Route& route = routes[r];
    const int col = m.add_column(fmt::format("route_{}", r), 0, 1, route.owner_cost().value(), true);
    out.route_columns.push_back(col);
    for (std::size_t c = 0; c < cover.size(); ++c) {
      if ((route.covered >> c) & 1U) m.add_coef(cover[c], col, 1.0);
    }
    for (auto [s, t] : route.charging_steps()) {
      m.add_coef(cap[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)], col, 1.0);
    }
    max_cost = std::max(max_cost, route.cost().value());
  }
  const double fleet_bound = static_cast<double>(inst.num_customers()) * max_cost + 1.0;

  for (const Scenario& z : scenarios) {
    const int f = m.add_column(fmt::format("exec_{}", z.index), 0, 1, 0.0, true);
    out.executable_columns.push_back(f);
    const int any = m.add_row(fmt::format("exec_any_{}", z.index), lp::Sense::Ge, 1.0);
    m.add_coef(any, f, 1.0);
    for (int i = 0; i < inst.num_stations(); ++i) {
      const double smax = inst.stations()[static_cast<std::size_t>(i)].size_max;
      const int ports = out.port_columns[static_cast<std::size_t>(i)];
      for (int t = 0; t < inst.horizon(); ++t) {
        const int n = z.usage[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
        if (n == 0) continue;
        const int v = m.add_column(fmt::format("short_{}_{}_{}", z.index, i, t), 0, 1, 0.0, true);
        m.add_coef(any, v, 1.0);
        // v = 1 exactly when the built ports fall short of the scenario's usage.
        const int ge = m.add_row(fmt::format("short_lo_{}_{}_{}", z.index, i, t), lp::Sense::Ge, n);
        m.add_coef(ge, ports, 1.0);
        m.add_coef(ge, v, smax);
        const int le = m.add_row(fmt::format("short_hi_{}_{}_{}", z.index, i, t), lp::Sense::Le, n - 1 + smax);
        m.add_coef(le, ports, 1.0);
        m.add_coef(le, v, smax);
        const int excl = m.add_row(fmt::format("exec_off_{}_{}_{}", z.index, i, t), lp::Sense::Le, 1.0);
        m.add_coef(excl, f, 1.0);
        m.add_coef(excl, v, 1.0);
      }
    }
    const double big_m = std::max(0.0, fleet_bound - z.fo_cost.value());
    const int cut = m.add_row(fmt::format("cut_{}", z.index), lp::Sense::Le,
                              z.fo_cost.value() + kCapTolerance + big_m);
    for (std::size_t r = 0; r < routes.size(); ++r) m.add_coef(cut, out.route_columns[r], routes[r].cost().value());
    m.add_coef(cut, f, big_m);
  }
  return out;
}

SingleEntityResult solve_single_entity(const PtenGraph& graph, const ColgenOptions& options) {
  const Instance& inst = graph.instance();
  const auto grid = oracle::leader_grid(inst);
  ColumnPool pool;
  struct Candidate {
    std::size_t grid = 0;
    Money capex;
    double bound = 0.0;
    ColgenResult lp;
  };
  std::vector<Candidate> cands;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    Candidate c;
    c.grid = g;
    c.capex = LeaderDecision::with_ports(inst, grid[g]).capex(inst);
    c.lp = run_column_generation(graph, MasterSpec{MasterKind::Joint, grid[g], std::nullopt}, pool, options);
    c.bound = c.capex.value() + c.lp.lp_bound;
    cands.push_back(std::move(c));
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.bound < b.bound; });
  std::optional<SingleEntityResult> best;
  for (const Candidate& c : cands) {
    if (best) {
      const double tol = 1e-7 * std::max(1.0, std::abs(best->total.value()));
      if (c.bound - tol >= best->total.value()) break;
    }
    const IntegerResult ir = integerize(graph, MasterSpec{MasterKind::Joint, grid[c.grid], std::nullopt}, pool, c.lp);
    if (!ir.feasible) continue;
    const Money total = c.capex + Money::from_double(ir.objective);
    if (!best || total < best->total) {
      const LeaderDecision dec = LeaderDecision::with_ports(inst, grid[c.grid]);
      best = SingleEntityResult{dec, ir.plan, total, elrp::fo_cost(ir.plan), elrp::csp_cost(inst, dec, ir.plan)};
    }
  }
  if (!best) throw InfeasibleError("no station layout lets the fleet serve every customer");
  return *best;
}

}  // namespace elrp
