#include "elrp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <sstream>

#include <fmt/format.h>

#include "elrp/errors.hpp"
#include "elrp/log.hpp"
#include "elrp/oracle.hpp"

namespace elrp {

namespace {

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw DomainError(fmt::format("not a number: '{}'", text));
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double snap(double v) { return std::round(v * 1e9) / 1e9; }

std::string fixed(double v) { return fmt::format("{:.6f}", v == 0.0 ? 0.0 : v); }

std::string hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

std::string route_signature(const PtenGraph& graph, const Route& route) {
  std::string s = fmt::format("k{}", graph.instance().vehicle_types()[static_cast<std::size_t>(route.vehicle_type)].id);
  for (int v : route.nodes) {
    const PtenNode& n = graph.node(v);
    if (n.kind == NodeKind::StationDummy) {
      s += fmt::format(" {}@{}", graph.instance().stations()[static_cast<std::size_t>(n.station)].id, n.time);
    } else {
      s += " " + n.name;
    }
  }
  return s;
}

std::shared_ptr<const Instance> with_fee(const Instance& base, double fee) {
  return std::make_shared<const Instance>(with_overrides(base, InstancePatch::uniform_fee(base, fee)));
}

std::string error_text(const std::exception& e) {
  std::string s = e.what();
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string per_station(const Instance& inst, const std::vector<int>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += fmt::format("{}{}={}", i ? ";" : "", inst.stations()[i].id, values[i]);
  }
  return s;
}

int clamp_jobs(int jobs) { return std::max(1, jobs); }

}  // namespace

std::vector<double> parse_fee_grid(std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw DomainError(fmt::format("fee grid '{}' is not a:b:step", text));
    const double a = parse_double(parts[0]);
    const double b = parse_double(parts[1]);
    const double step = parse_double(parts[2]);
    if (step <= 0.0 || b < a) throw DomainError(fmt::format("fee grid '{}' needs b >= a and step > 0", text));
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(snap(a + static_cast<double>(i) * step));
  } else {
    for (std::string_view p : split(text, ',')) out.push_back(snap(parse_double(p)));
  }
  for (double f : out) {
    if (f < 0.0 || f > 10.0) throw DomainError(fmt::format("fee {} outside [0, 10]", f));
  }
  return out;
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  for (std::string_view p : split(text, ',')) {
    const double v = parse_double(p);
    if (v <= 0.0) throw DomainError(fmt::format("value {} must be positive", v));
    out.push_back(v);
  }
  return out;
}

std::uint64_t strategy_hash(const PtenGraph& graph, const FleetPlan& plan) {
  std::vector<std::string> sigs;
  sigs.reserve(plan.routes.size());
  for (const Route& r : plan.routes) sigs.push_back(route_signature(graph, r));
  std::sort(sigs.begin(), sigs.end());
  std::uint64_t h = 14695981039346656037ULL;
  for (const std::string& s : sigs) {
    for (char c : s + "|") {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

CostBreakdown breakdown(const Instance& instance, const LeaderDecision& decision, const FleetPlan& plan) {
  CostBreakdown b;
  for (const Route& r : plan.routes) {
    b.fleet += r.vehicle_cost;
    b.travel += r.travel_cost;
    b.charging += r.charging_cost;
    b.revenue += r.fee_revenue;
  }
  b.capex = decision.capex(instance);
  return b;
}

std::string solution_csv(const PtenGraph& graph, const FleetPlan& plan) {
  const Instance& inst = graph.instance();
  std::ostringstream out;
  out << "route,vehicle_type,step,node,kind,station,port,time,load_after,energy_after\n";
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const Route& route = plan.routes[r];
    const int vid = inst.vehicle_types()[static_cast<std::size_t>(route.vehicle_type)].id;
    for (std::size_t i = 0; i < route.visits.size(); ++i) {
      const RouteVisit& v = route.visits[i];
      const PtenNode& n = graph.node(v.node);
      const std::string station =
          n.kind == NodeKind::StationDummy ? inst.stations()[static_cast<std::size_t>(n.station)].id : "";
      out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r, vid, i, n.name, to_string(n.kind), station,
                         n.kind == NodeKind::StationDummy ? std::to_string(n.port) : "", v.arrival,
                         fixed(v.load_after), fixed(v.energy_after));
    }
  }
  return out.str();
}

std::string summary_csv(const PtenGraph& graph, const CcgResult& result) {
  const Instance& inst = graph.instance();
  std::string fees;
  std::string upgrade;
  for (std::size_t s = 0; s < inst.stations().size(); ++s) {
    fees += fmt::format("{}{}={}", s ? ";" : "", inst.stations()[s].id, fixed(inst.economics().service_fee[s]));
    upgrade += fmt::format("{}{}={}", s ? ";" : "", inst.stations()[s].id, fixed(result.decision.upgrade[s]));
  }
  std::map<int, int> fleet;
  for (const VehicleType& k : inst.vehicle_types()) fleet[k.id] = 0;
  for (const Route& r : result.plan.routes) {
    ++fleet[inst.vehicle_types()[static_cast<std::size_t>(r.vehicle_type)].id];
  }
  std::string fleet_text;
  for (auto [id, n] : fleet) fleet_text += fmt::format("{}type{}={}", fleet_text.empty() ? "" : ";", id, n);
  const CostBreakdown b = breakdown(inst, result.decision, result.plan);
  std::ostringstream out;
  out << "instance,fee,lb,ub,gap,iterations,leader_cost,follower_cost,capex,revenue,fleet_cost,travel_cost,"
         "charging_cost,stations_built,ports,upgrade_kw,routes,fleet,energy_sold,strategy\n";
  out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", inst.name(), fees,
                     fixed(result.lb), fixed(result.ub), fixed(result.ub - result.lb), result.iterations,
                     result.leader_cost.to_string(), result.follower_cost.to_string(), b.capex.to_string(),
                     b.revenue.to_string(), b.fleet.to_string(), b.travel.to_string(), b.charging.to_string(),
                     result.decision.stations_built(), per_station(inst, result.decision.ports), upgrade,
                     result.plan.routes.size(), fleet_text, fixed(energy_sold(result.plan)),
                     hex(strategy_hash(graph, result.plan)));
  return out.str();
}

SolveReport run_solve(const Instance& instance, const CcgOptions& options) {
  const PtenGraph graph = expand(std::make_shared<const Instance>(instance));
  SolveReport rep;
  rep.result = run_ccg(graph, options);
  rep.solution_csv = solution_csv(graph, rep.result.plan);
  rep.summary_csv = summary_csv(graph, rep.result);
  rep.iterations_csv = format_ccg_log(rep.result.log);
  return rep;
}

std::vector<SweepRow> run_fee_sweep(const Instance& base, const std::vector<double>& fees,
                                    const SweepOptions& options) {
  std::vector<SweepRow> rows(fees.size());
  const auto n = static_cast<std::ptrdiff_t>(fees.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(clamp_jobs(options.jobs))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    SweepRow& row = rows[static_cast<std::size_t>(i)];
    row.fee = fees[static_cast<std::size_t>(i)];
    try {
      const PtenGraph graph = expand(with_fee(base, row.fee));
      const CcgResult r = run_ccg(graph, options.ccg);
      row.fo_cost = r.follower_cost;
      row.csp_cost = r.leader_cost;
      row.energy = energy_sold(r.plan);
      row.stations_built = r.decision.stations_built();
      row.ports = r.decision.total_ports();
      row.strategy = strategy_hash(graph, r.plan);
      row.iterations = r.iterations;
      row.ok = true;
      if (options.single_entity) {
        const SingleEntityResult se = solve_single_entity(graph, options.ccg.colgen);
        row.se_total = se.total;
        row.se_fo_cost = se.fo_cost;
        row.se_csp_cost = se.csp_cost;
        row.se_stations_built = se.decision.stations_built();
        row.se_strategy = strategy_hash(graph, se.plan);
        row.se_ok = true;
      }
    } catch (const std::exception& e) {
      row.error = error_text(e);
      log().warn("fee {}: {}", row.fee, e.what());
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "fee,fo_cost,csp_cost,csp_profit,total,stations_built,ports,total_energy_sold,strategy,iterations,"
         "se_total,se_fo_cost,se_csp_cost,se_stations_built,se_strategy,error\n";
  for (const SweepRow& r : rows) {
    out << fixed(r.fee) << ',';
    if (r.ok) {
      out << fmt::format("{},{},{},{},{},{},{},{},{},", r.fo_cost.to_string(), r.csp_cost.to_string(),
                         r.csp_profit().to_string(), r.total().to_string(), r.stations_built, r.ports,
                         fixed(r.energy), hex(r.strategy), r.iterations);
    } else {
      out << ",,,,,,,,,";
    }
    if (r.se_ok) {
      out << fmt::format("{},{},{},{},{},", r.se_total.to_string(), r.se_fo_cost.to_string(),
                         r.se_csp_cost.to_string(), r.se_stations_built, hex(r.se_strategy));
    } else {
      out << ",,,,,";
    }
    out << r.error << '\n';
  }
  return out.str();
}

std::vector<RateRow> run_rate_study(const Instance& base, const std::vector<double>& rates,
                                    const RateOptions& options) {
  if (base.num_stations() == 0) throw ValidationError("stations", "rate study needs a candidate station");
  const std::string station = options.station.empty() ? base.stations().back().id : options.station;
  const auto s = base.station_index(station);
  if (!s) throw UnknownStation(fmt::format("unknown station '{}'", station));
  const Instance fee_base = options.fee ? with_overrides(base, InstancePatch::uniform_fee(base, *options.fee)) : base;

  std::vector<RateRow> rows(rates.size());
  const auto n = static_cast<std::ptrdiff_t>(rates.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(clamp_jobs(options.jobs))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    RateRow& row = rows[static_cast<std::size_t>(i)];
    row.rate = rates[static_cast<std::size_t>(i)];
    row.fee = fee_base.economics().service_fee[static_cast<std::size_t>(*s)];
    try {
      InstancePatch patch;
      patch.rated_power[station] = row.rate;
      const PtenGraph graph = expand(std::make_shared<const Instance>(with_overrides(fee_base, patch)));
      const CcgResult r = run_ccg(graph, options.ccg);
      row.cost = breakdown(graph.instance(), r.decision, r.plan);
      row.energy = energy_sold(r.plan);
      row.stations_built = r.decision.stations_built();
      row.ports = r.decision.total_ports();
      row.strategy = strategy_hash(graph, r.plan);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = error_text(e);
      log().warn("rate {}: {}", row.rate, e.what());
    }
  }
  return rows;
}

std::string rates_csv(const std::vector<RateRow>& rows) {
  std::ostringstream out;
  out << "rate,fee,fo_cost,fleet,travel,charging,csp_cost,capex,revenue,csp_profit,stations_built,ports,"
         "total_energy_sold,strategy,error\n";
  for (const RateRow& r : rows) {
    out << fixed(r.rate) << ',' << fixed(r.fee) << ',';
    if (r.ok) {
      const CostBreakdown& c = r.cost;
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},", c.fo_cost().to_string(), c.fleet.to_string(),
                         c.travel.to_string(), c.charging.to_string(), c.csp_cost().to_string(),
                         c.capex.to_string(), c.revenue.to_string(), (-c.csp_cost()).to_string(), r.stations_built,
                         r.ports, fixed(r.energy), hex(r.strategy));
    } else {
      out << ",,,,,,,,,,,,";
    }
    out << r.error << '\n';
  }
  return out.str();
}

std::vector<OracleCheckRow> run_oracle_check(const Instance& base, const std::vector<double>& fees,
                                             const CcgOptions& options) {
  std::vector<OracleCheckRow> rows;
  for (double fee : fees) {
    const PtenGraph graph = expand(with_fee(base, fee));
    const oracle::BilevelResult ref = oracle::bilevel_exhaustive(graph);
    const CcgResult r = run_ccg(graph, options);
    rows.push_back({fee, r.leader_cost, r.follower_cost, ref.leader_cost, ref.follower_cost, r.iterations});
  }
  return rows;
}

std::string oracle_check_csv(const std::vector<OracleCheckRow>& rows) {
  std::ostringstream out;
  out << "fee,ccg_leader,oracle_leader,ccg_follower,oracle_follower,iterations,match\n";
  for (const OracleCheckRow& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", fixed(r.fee), r.ccg_leader.to_string(), r.oracle_leader.to_string(),
                       r.ccg_follower.to_string(), r.oracle_follower.to_string(), r.iterations,
                       r.match() ? "yes" : "no");
  }
  return out.str();
}

}  // namespace elrp
