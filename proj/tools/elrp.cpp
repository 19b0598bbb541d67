// Command-line driver: single solves, fee sweeps, rate studies and oracle checks.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "elrp/errors.hpp"
#include "elrp/experiment.hpp"
#include "elrp/log.hpp"

namespace fs = std::filesystem;
using namespace elrp;

namespace {

constexpr int kOk = 0;
constexpr int kSolverError = 1;
constexpr int kUsageError = 2;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Args {
  std::string instance;
  std::optional<double> fee;
  std::string fees = "0:0.5:0.05";
  std::string rates = "10,15,20";
  std::string station;
  std::optional<double> epsilon;
  int jobs = 1;
  std::string out = ".";
  bool trace = false;
  bool no_single_entity = false;
};

void write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot write '{}'", (dir / name).string()));
  f << text;
  if (!f) throw IoError(fmt::format("cannot write '{}'", (dir / name).string()));
}

CcgOptions ccg_options(const Args& a) {
  CcgOptions o;
  o.epsilon = a.epsilon;
  o.trace = a.trace;
  o.colgen.trace = a.trace;
  if (a.trace && log().level() > spdlog::level::info) log().set_level(spdlog::level::info);
  return o;
}

Instance load(const Args& a) {
  Instance inst = load_instance(a.instance);
  if (a.fee) inst = with_overrides(inst, InstancePatch::uniform_fee(inst, *a.fee));
  return inst;
}

int cmd_solve(const Args& a) {
  const SolveReport rep = run_solve(load(a), ccg_options(a));
  write_file(a.out, "solution.csv", rep.solution_csv);
  write_file(a.out, "summary.csv", rep.summary_csv);
  write_file(a.out, "iterations.csv", rep.iterations_csv);
  std::cout << rep.summary_csv;
  return kOk;
}

int cmd_sweep(const Args& a) {
  SweepOptions o;
  o.ccg = ccg_options(a);
  o.jobs = a.jobs;
  o.single_entity = !a.no_single_entity;
  const auto rows = run_fee_sweep(load_instance(a.instance), parse_fee_grid(a.fees), o);
  const std::string text = sweep_csv(rows);
  write_file(a.out, "sweep.csv", text);
  std::cout << text;
  for (const SweepRow& r : rows) {
    if (!r.error.empty()) return kSolverError;
  }
  return kOk;
}

int cmd_rates(const Args& a) {
  RateOptions o;
  o.ccg = ccg_options(a);
  o.jobs = a.jobs;
  o.station = a.station;
  o.fee = a.fee;
  const auto rows = run_rate_study(load_instance(a.instance), parse_number_list(a.rates), o);
  const std::string text = rates_csv(rows);
  write_file(a.out, "rates.csv", text);
  std::cout << text;
  for (const RateRow& r : rows) {
    if (!r.error.empty()) return kSolverError;
  }
  return kOk;
}

int cmd_oracle_check(const Args& a) {
  const Instance base = load_instance(a.instance);
  std::vector<double> fees;
  if (a.fee) {
    fees.push_back(*a.fee);
  } else {
    fees = parse_fee_grid(a.fees);
  }
  const auto rows = run_oracle_check(base, fees, ccg_options(a));
  std::cout << oracle_check_csv(rows);
  for (const OracleCheckRow& r : rows) {
    if (!r.match()) return kSolverError;
  }
  return kOk;
}

int cmd_dump_graph(const Args& a) {
  std::cout << dump_graph(expand(std::make_shared<const Instance>(load(a))));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Station siting and e-truck fleet planning with a leader-follower game"};
  app.require_subcommand(1);
  Args a;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--instance", a.instance, "instance file")->required();
    sub->add_option("--epsilon", a.epsilon, "absolute convergence tolerance on UB - LB");
    sub->add_flag("--trace", a.trace, "log every column-generation and CCG iteration");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one instance, write solution/summary/iterations CSVs");
  common(solve);
  solve->add_option("--fee", a.fee, "service fee applied at every station");
  solve->add_option("--out", a.out, "output directory");

  CLI::App* sweep = app.add_subcommand("sweep", "solve over a fee grid, write sweep.csv");
  common(sweep);
  sweep->add_option("--fees", a.fees, "a:b:step or comma list")->capture_default_str();
  sweep->add_option("--jobs", a.jobs, "fee points solved concurrently")->check(CLI::PositiveNumber);
  sweep->add_option("--out", a.out, "output directory");
  sweep->add_flag("--no-single-entity", a.no_single_entity, "skip the single decision maker comparator");

  CLI::App* rates = app.add_subcommand("rates", "vary the charging rate of one station, write rates.csv");
  common(rates);
  rates->add_option("--rates", a.rates, "comma list of rated powers in kW")->capture_default_str();
  rates->add_option("--station", a.station, "station id (default: last candidate)");
  rates->add_option("--fee", a.fee, "service fee applied at every station");
  rates->add_option("--jobs", a.jobs, "rates solved concurrently")->check(CLI::PositiveNumber);
  rates->add_option("--out", a.out, "output directory");

  CLI::App* check = app.add_subcommand("oracle-check", "compare the solver with exhaustive search");
  common(check);
  check->add_option("--fee", a.fee, "single service fee");
  check->add_option("--fees", a.fees, "a:b:step or comma list")->capture_default_str();

  CLI::App* dump = app.add_subcommand("dump-graph", "print the time-expanded network");
  dump->add_option("--instance", a.instance, "instance file")->required();
  dump->add_option("--fee", a.fee, "service fee applied at every station");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*solve) return cmd_solve(a);
    if (*sweep) return cmd_sweep(a);
    if (*rates) return cmd_rates(a);
    if (*check) return cmd_oracle_check(a);
    if (*dump) return cmd_dump_graph(a);
  } catch (const ParseError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsageError;
  } catch (const ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsageError;
  } catch (const DomainError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsageError;
  } catch (const UnknownStation& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsageError;
  } catch (const IoError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "solver error: {}\n", e.what());
    return kSolverError;
  }
  return kUsageError;
}
