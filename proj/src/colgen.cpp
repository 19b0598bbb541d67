#include "elrp/colgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "elrp/errors.hpp"
#include "elrp/log.hpp"

namespace elrp {

namespace {

constexpr double kArtificialFloor = 1e6;

}  // namespace

std::string ColumnPool::signature(const PtenGraph& graph, const Route& route) {
  std::string s = std::to_string(route.vehicle_type);
  for (int v : route.nodes) {
    const PtenNode& n = graph.node(v);
    if (n.kind == NodeKind::StationDummy) {
      s += fmt::format(",s{}@{}", n.station, n.time);
    } else {
      s += fmt::format(",{}", v);
    }
  }
  return s;
}

bool ColumnPool::add(const PtenGraph& graph, const Route& route) {
  std::string key = signature(graph, route);
  if (seen_.count(key) != 0) return false;
  routes_.push_back(simulate_route(graph, route.vehicle_type, route.nodes));
  seen_.insert(std::move(key));
  return true;
}

bool ColumnPool::contains(const PtenGraph& graph, const Route& route) const {
  return seen_.count(signature(graph, route)) != 0;
}

double master_cost(const Route& route, MasterKind kind) {
  switch (kind) {
    case MasterKind::Follower: return route.cost().value();
    case MasterKind::Leader: return route.owner_cost().value();
    case MasterKind::Joint: return (route.cost() + route.owner_cost()).value();
  }
  return 0.0;
}

namespace {

double covered_sum(const Route& route, const std::vector<double>& cover) {
  double s = 0.0;
  for (std::size_t c = 0; c < cover.size(); ++c) {
    if ((route.covered >> c) & 1U) s += cover[c];
  }
  return s;
}

double slot_sum(const Route& route, const DualPrices& duals) {
  if (duals.slot.empty()) return 0.0;
  double s = 0.0;
  for (auto [st, t] : route.charging_steps()) s += duals.slot[static_cast<std::size_t>(st)][static_cast<std::size_t>(t)];
  return s;
}

}  // namespace

double reduced_cost_mp1(const Route& route, const DualPrices& duals) {
  return route.cost().value() - covered_sum(route, duals.cover) + slot_sum(route, duals);
}

double reduced_cost_mp0(const Route& route, const DualPrices& duals) {
  return route.owner_cost().value() - covered_sum(route, duals.cover) + slot_sum(route, duals) +
         duals.cap * route.cost().value();
}

PricingContext pricing_context(const MasterSpec& spec, const DualPrices& duals, int vehicle_type) {
  PricingContext ctx;
  ctx.vehicle_type = vehicle_type;
  switch (spec.kind) {
    case MasterKind::Follower:
      ctx.cost_weight = 1.0;
      ctx.revenue_weight = 0.0;
      break;
    case MasterKind::Leader:
      ctx.cost_weight = duals.cap;
      ctx.revenue_weight = 1.0;
      break;
    case MasterKind::Joint:
      ctx.cost_weight = 1.0;
      ctx.revenue_weight = 1.0;
      break;
  }
  ctx.cover_dual = duals.cover;
  ctx.slot_dual = duals.slot;
  ctx.station_open.assign(spec.ports.size(), 0);
  for (std::size_t s = 0; s < spec.ports.size(); ++s) ctx.station_open[s] = spec.ports[s] > 0 ? 1 : 0;
  return ctx;
}

bool admissible(const Route& route, const MasterSpec& spec) {
  const auto steps = route.charging_steps();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const int s = steps[i].first;
    if (spec.ports[static_cast<std::size_t>(s)] <= 0) return false;
    int same = 1;
    while (i + 1 < steps.size() && steps[i + 1] == steps[i]) {
      ++same;
      ++i;
    }
    if (same > spec.ports[static_cast<std::size_t>(s)]) return false;
  }
  return true;
}

namespace {

struct MasterRows {
  std::vector<int> cover;
  std::vector<std::vector<int>> cap;  // [station][t] row id or -1
  int fleet_cap = -1;
};

MasterRows add_rows(lp::Model& m, const PtenGraph& graph, const MasterSpec& spec) {
  const Instance& inst = graph.instance();
  MasterRows rows;
  for (const Customer& c : inst.customers()) rows.cover.push_back(m.add_row("cov_" + c.id, lp::Sense::Eq, 1.0));
  rows.cap.assign(static_cast<std::size_t>(inst.num_stations()),
                  std::vector<int>(static_cast<std::size_t>(inst.horizon()), -1));
  for (int s = 0; s < inst.num_stations(); ++s) {
    const int ports = spec.ports[static_cast<std::size_t>(s)];
    if (ports <= 0) continue;
    for (int t = 0; t < inst.horizon(); ++t) {
      if (!graph.has_charging_slot(s, t)) continue;
      rows.cap[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] =
          m.add_row(fmt::format("cap_{}_{}", inst.stations()[static_cast<std::size_t>(s)].id, t), lp::Sense::Le, ports);
    }
  }
  if (spec.fleet_cost_cap) rows.fleet_cap = m.add_row("beta_cap", lp::Sense::Le, *spec.fleet_cost_cap);
  return rows;
}

void add_route_columns(lp::Model& m, const MasterRows& rows, const MasterSpec& spec, const ColumnPool& pool,
                       bool integer, std::vector<std::size_t>& column_route) {
  for (std::size_t idx = 0; idx < pool.size(); ++idx) {
    const Route& r = pool.routes()[idx];
    if (!admissible(r, spec)) continue;
    const int col = m.add_column(fmt::format("route_{}", idx), 0.0, integer ? 1.0 : lp::kInf,
                                 master_cost(r, spec.kind), integer);
    column_route.push_back(idx);
    for (std::size_t c = 0; c < rows.cover.size(); ++c) {
      if ((r.covered >> c) & 1U) m.add_coef(rows.cover[c], col, 1.0);
    }
    for (auto [s, t] : r.charging_steps()) {
      m.add_coef(rows.cap[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)], col, 1.0);
    }
    if (rows.fleet_cap >= 0) m.add_coef(rows.fleet_cap, col, r.cost().value());
  }
}

// Coverage penalty large enough that no integer plan prefers an artificial
// column to a real route.
double artificial_cost(const ColumnPool& pool, std::size_t customers) {
  double worst = 0.0;
  for (const Route& r : pool.routes()) {
    worst = std::max({worst, std::abs(r.cost().value()), std::abs(r.owner_cost().value())});
  }
  return std::max(kArtificialFloor, 10.0 * static_cast<double>(customers + 1) * worst);
}

void add_artificials(lp::Model& m, const PtenGraph& graph, const ColumnPool& pool, const MasterRows& rows,
                     bool integer) {
  const double penalty = artificial_cost(pool, rows.cover.size());
  for (std::size_t c = 0; c < rows.cover.size(); ++c) {
    const int col = m.add_column("art_" + graph.instance().customers()[c].id, 0.0, integer ? 1.0 : lp::kInf,
                                 penalty);
    m.add_coef(rows.cover[c], col, 1.0);
  }
}

DualPrices extract_duals(const lp::Solution& sol, const MasterRows& rows, const Instance& inst) {
  DualPrices d;
  for (int r : rows.cover) d.cover.push_back(sol.duals[static_cast<std::size_t>(r)]);
  d.slot.assign(static_cast<std::size_t>(inst.num_stations()), std::vector<double>(static_cast<std::size_t>(inst.horizon()), 0.0));
  for (std::size_t s = 0; s < rows.cap.size(); ++s) {
    for (std::size_t t = 0; t < rows.cap[s].size(); ++t) {
      if (rows.cap[s][t] >= 0) d.slot[s][t] = std::max(0.0, -sol.duals[static_cast<std::size_t>(rows.cap[s][t])]);
    }
  }
  if (rows.fleet_cap >= 0) d.cap = std::max(0.0, -sol.duals[static_cast<std::size_t>(rows.fleet_cap)]);
  return d;
}

}  // namespace

lp::Model build_master(const PtenGraph& graph, const MasterSpec& spec, const ColumnPool& pool, bool integer,
                       std::vector<std::size_t>* column_route) {
  lp::Model m;
  const MasterRows rows = add_rows(m, graph, spec);
  std::vector<std::size_t> cols;
  add_route_columns(m, rows, spec, pool, integer, cols);
  add_artificials(m, graph, pool, rows, integer);
  if (column_route != nullptr) *column_route = std::move(cols);
  return m;
}

MasterSolution solve_rmp(const PtenGraph& graph, const MasterSpec& spec, const ColumnPool& pool,
                         const DualPrices* center, double half_width, double penalty) {
  lp::Model m;
  const MasterRows rows = add_rows(m, graph, spec);
  MasterSolution out;
  add_route_columns(m, rows, spec, pool, false, out.column_route);
  const int first_art = m.num_columns();
  add_artificials(m, graph, pool, rows, false);
  const int first_box = m.num_columns();
  if (center != nullptr) {
    for (std::size_t c = 0; c < rows.cover.size(); ++c) {
      const double mid = center->cover[c];
      const int up = m.add_column(fmt::format("box_up_{}", c), 0.0, penalty, mid + half_width);
      m.add_coef(rows.cover[c], up, 1.0);
      const int down = m.add_column(fmt::format("box_down_{}", c), 0.0, penalty, -(mid - half_width));
      m.add_coef(rows.cover[c], down, -1.0);
    }
  }
  out.lp = lp::solve_lp(m);
  if (out.lp.status != lp::Status::Optimal) {
    throw NumericalError(fmt::format("restricted master returned {}", lp::to_string(out.lp.status)));
  }
  for (int j = first_art; j < first_box; ++j) out.uses_artificial |= out.lp.primal[static_cast<std::size_t>(j)] > 1e-9;
  for (int j = first_box; j < m.num_columns(); ++j) out.uses_box |= out.lp.primal[static_cast<std::size_t>(j)] > 1e-9;
  out.duals = extract_duals(out.lp, rows, graph.instance());
  return out;
}

namespace {

double default_half_width(const PtenGraph& graph, const MasterSpec& spec, const ColumnPool& pool) {
  const int n = graph.instance().num_customers();
  double total = 0.0;
  int count = 0;
  for (int c = 0; c < n; ++c) {
    double best = std::numeric_limits<double>::infinity();
    for (const Route& r : pool.routes()) {
      if (r.covered == (std::uint64_t{1} << c) && admissible(r, spec)) best = std::min(best, std::abs(master_cost(r, spec.kind)));
    }
    if (std::isfinite(best)) {
      total += best;
      ++count;
    }
  }
  if (count == 0) {
    for (const Route& r : pool.routes()) {
      total += std::abs(master_cost(r, spec.kind));
      ++count;
    }
  }
  const double mean = count > 0 ? total / count : 0.0;
  return std::max(1.0, 0.1 * mean);
}

std::vector<PricingResult> price_all(const PtenGraph& graph, const MasterSpec& spec, const DualPrices& duals,
                                     const ColgenOptions& options) {
  const int nk = graph.instance().num_vehicle_types();
  std::vector<PricingResult> results(static_cast<std::size_t>(nk));
#pragma omp parallel for schedule(static) if (options.parallel_pricing && nk > 1)
  for (int k = 0; k < nk; ++k) {
    PricingContext ctx = pricing_context(spec, duals, k);
    ctx.max_routes = options.routes_per_pricing;
    ctx.trace = options.trace;
    results[static_cast<std::size_t>(k)] = solve_pricing(graph, ctx);
  }
  return results;
}

double max_dual_change(const DualPrices& a, const DualPrices& b) {
  double d = 0.0;
  for (std::size_t c = 0; c < a.cover.size(); ++c) d = std::max(d, std::abs(a.cover[c] - b.cover[c]));
  return d;
}

}  // namespace

ColgenResult run_column_generation(const PtenGraph& graph, const MasterSpec& spec, ColumnPool& pool,
                                   const ColgenOptions& options) {
  ColgenResult res;
  bool stabilize = options.stabilization.enabled;
  double half_width = options.stabilization.half_width > 0.0 ? options.stabilization.half_width
                                                             : default_half_width(graph, spec, pool);
  std::optional<DualPrices> center;
  double last_obj = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (int iter = 1;; ++iter) {
    if (iter > options.max_iterations) {
      const double bound = res.log.empty() ? 0.0 : res.log.back().lp_obj;
      throw IterationLimit(fmt::format("column generation stopped after {} master iterations", options.max_iterations),
                           -std::numeric_limits<double>::infinity(), bound);
    }
    const bool boxed = stabilize && center.has_value();
    const MasterSolution ms = solve_rmp(graph, spec, pool, boxed ? &*center : nullptr, half_width,
                                        options.stabilization.penalty);
    const auto priced = price_all(graph, spec, ms.duals, options);
    std::size_t found = 0;
    std::size_t added = 0;
    ColgenIteration row;
    row.iter = iter;
    row.lp_obj = ms.lp.objective;
    row.box_width = boxed ? half_width : 0.0;
    for (const PricingResult& pr : priced) {
      row.best_phi.push_back(pr.best_reduced_cost);
      for (const Route& r : pr.routes) {
        ++found;
        if (pool.add(graph, r)) ++added;
      }
    }
    row.pool_size = pool.size();
    res.log.push_back(row);
    if (options.trace) {
      log().info("colgen iter={} lp_obj={:.6f} pool={} added={} box={}", iter, row.lp_obj, row.pool_size, added,
                 row.box_width);
    }
    if (added > 0) {
      if (stabilize) {
        if (!center || max_dual_change(ms.duals, *center) > half_width / 2) center = ms.duals;
        stall = ms.lp.objective >= last_obj - 1e-9 * (1.0 + std::abs(last_obj)) ? stall + 1 : 0;
        if (stall >= 2) {
          half_width /= 2;
          stall = 0;
        }
      }
      last_obj = ms.lp.objective;
      continue;
    }
    if (boxed || (stabilize && !center)) {
      // Stabilized duals are not certified: finish with the plain master.
      stabilize = false;
      continue;
    }
    if (found > 0) log().debug("colgen: pricing only re-found pool columns; master optimal within tolerance");
    res.lp_bound = ms.lp.objective;
    res.duals = ms.duals;
    res.lp_feasible = !ms.uses_artificial;
    break;
  }
  return res;
}

namespace {

std::size_t enumerate_into_pool(const PtenGraph& graph, const MasterSpec& spec, const DualPrices& duals,
                                double threshold, ColumnPool& pool) {
  std::size_t added = 0;
  for (int k = 0; k < graph.instance().num_vehicle_types(); ++k) {
    PricingContext ctx = pricing_context(spec, duals, k);
    ctx.dominance = false;
    ctx.threshold = threshold;
    for (const Route& r : solve_pricing(graph, ctx).routes) {
      if (pool.add(graph, r)) ++added;
    }
  }
  return added;
}

struct MilpOutcome {
  bool feasible = false;
  double objective = 0.0;
  std::vector<std::size_t> chosen;
};

MilpOutcome solve_integer_master(const PtenGraph& graph, const MasterSpec& spec, const ColumnPool& pool) {
  std::vector<std::size_t> column_route;
  const lp::Model m = build_master(graph, spec, pool, true, &column_route);
  lp::MilpOptions opt;
  opt.gap = 1e-10;
  const lp::Solution sol = lp::solve_milp(m, opt);
  MilpOutcome out;
  if (sol.status != lp::Status::Optimal) return out;
  for (int j = static_cast<int>(column_route.size()); j < m.num_columns(); ++j) {
    if (sol.primal[static_cast<std::size_t>(j)] > 0.5) return out;
  }
  out.feasible = true;
  out.objective = sol.objective;
  for (std::size_t j = 0; j < column_route.size(); ++j) {
    if (sol.primal[j] > 0.5) out.chosen.push_back(column_route[j]);
  }
  return out;
}

double exact_objective(const FleetPlan& plan, MasterKind kind) {
  Money total;
  for (const Route& r : plan.routes) {
    if (kind != MasterKind::Leader) total += r.cost();
    if (kind != MasterKind::Follower) total += r.owner_cost();
  }
  return total.value();
}

}  // namespace

IntegerResult integerize(const PtenGraph& graph, const MasterSpec& spec, ColumnPool& pool, const ColgenResult& lp) {
  IntegerResult out;
  MilpOutcome mo = solve_integer_master(graph, spec, pool);
  if (!mo.feasible || !lp.lp_feasible) {
    out.routes_enumerated += enumerate_into_pool(graph, spec, lp.duals, std::numeric_limits<double>::infinity(), pool);
    mo = solve_integer_master(graph, spec, pool);
  } else {
    const double gap = mo.objective - lp.lp_bound;
    if (gap > 1e-7 * std::max(1.0, std::abs(lp.lp_bound))) {
      const std::size_t added = enumerate_into_pool(graph, spec, lp.duals, gap + 1e-6, pool);
      out.routes_enumerated += added;
      if (added > 0) mo = solve_integer_master(graph, spec, pool);
    }
  }
  if (!mo.feasible) return out;
  FleetPlan raw;
  for (std::size_t idx : mo.chosen) raw.routes.push_back(pool.routes()[idx]);
  out.plan = assign_ports(graph, raw);
  out.feasible = true;
  out.objective = exact_objective(out.plan, spec.kind);
  return out;
}

IntegerResult solve_master(const PtenGraph& graph, const MasterSpec& spec, ColumnPool& pool,
                           const ColgenOptions& options, ColgenResult* lp_out) {
  ColgenResult lp = run_column_generation(graph, spec, pool, options);
  IntegerResult res = integerize(graph, spec, pool, lp);
  if (lp_out != nullptr) *lp_out = std::move(lp);
  return res;
}

std::string format_iteration_log(const std::vector<ColgenIteration>& log) {
  std::ostringstream out;
  out << "iter,lp_obj,best_phi_per_type,pool_size,box_width\n";
  for (const ColgenIteration& row : log) {
    std::string phis;
    for (std::size_t k = 0; k < row.best_phi.size(); ++k) {
      if (k > 0) phis += ";";
      phis += std::isfinite(row.best_phi[k]) ? fmt::format("{:.6f}", row.best_phi[k]) : "none";
    }
    out << fmt::format("{},{:.6f},{},{},{:.6f}\n", row.iter, row.lp_obj, phis, row.pool_size, row.box_width);
  }
  return out.str();
}

}  // namespace elrp
