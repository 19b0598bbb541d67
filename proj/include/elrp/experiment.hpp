#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elrp/ccg.hpp"
#include "elrp/instance.hpp"
#include "elrp/money.hpp"

namespace elrp {

/// Fee grid from "a:b:step" (inclusive of b) or a comma list. Values are
/// rounded to 1e-9 so that repeated steps do not drift. Throws DomainError
/// on malformed text or values outside [0, 10].
[[nodiscard]] std::vector<double> parse_fee_grid(std::string_view text);
/// Comma-separated positive numbers. Throws DomainError.
[[nodiscard]] std::vector<double> parse_number_list(std::string_view text);

/// FNV-1a over the sorted route signatures of a plan; ports are ignored.
[[nodiscard]] std::uint64_t strategy_hash(const PtenGraph& graph, const FleetPlan& plan);

struct CostBreakdown {
  Money fleet;     // annualized vehicle cost
  Money travel;
  Money charging;  // electricity plus service fee paid by the fleet
  Money capex;     // station capital cost
  Money revenue;   // service fee collected by the owner

  [[nodiscard]] Money fo_cost() const { return fleet + travel + charging; }
  [[nodiscard]] Money csp_cost() const { return capex - revenue; }
};
[[nodiscard]] CostBreakdown breakdown(const Instance& instance, const LeaderDecision& decision, const FleetPlan& plan);

/// One bilevel solve with its plain-text reports.
struct SolveReport {
  CcgResult result;
  std::string solution_csv;
  std::string summary_csv;
  std::string iterations_csv;
};
[[nodiscard]] SolveReport run_solve(const Instance& instance, const CcgOptions& options = {});

[[nodiscard]] std::string solution_csv(const PtenGraph& graph, const FleetPlan& plan);
[[nodiscard]] std::string summary_csv(const PtenGraph& graph, const CcgResult& result);

struct SweepRow {
  double fee = 0.0;
  bool ok = false;
  Money fo_cost;
  Money csp_cost;
  double energy = 0.0;
  int stations_built = 0;
  int ports = 0;
  std::uint64_t strategy = 0;
  int iterations = 0;
  // Single decision maker on the same instance, costs split afterwards.
  bool se_ok = false;
  Money se_total;
  Money se_fo_cost;
  Money se_csp_cost;
  int se_stations_built = 0;
  std::uint64_t se_strategy = 0;
  std::string error;

  [[nodiscard]] Money csp_profit() const { return -csp_cost; }
  [[nodiscard]] Money total() const { return fo_cost + csp_cost; }
};

struct SweepOptions {
  CcgOptions ccg;
  int jobs = 1;
  bool single_entity = true;
};

/// Solves every fee point independently (up to `jobs` at a time). Failures
/// are recorded per row; rows come back in grid order.
[[nodiscard]] std::vector<SweepRow> run_fee_sweep(const Instance& base, const std::vector<double>& fees,
                                                  const SweepOptions& options = {});
[[nodiscard]] std::string sweep_csv(const std::vector<SweepRow>& rows);

struct RateRow {
  double rate = 0.0;
  double fee = 0.0;
  bool ok = false;
  CostBreakdown cost;
  double energy = 0.0;
  int stations_built = 0;
  int ports = 0;
  std::uint64_t strategy = 0;
  std::string error;
};

struct RateOptions {
  CcgOptions ccg;
  int jobs = 1;
  std::string station;        // empty: last candidate station
  std::optional<double> fee;  // empty: the instance fees
};

/// Re-solves the instance with the rated power of one station set to every
/// value of `rates`.
[[nodiscard]] std::vector<RateRow> run_rate_study(const Instance& base, const std::vector<double>& rates,
                                                  const RateOptions& options = {});
[[nodiscard]] std::string rates_csv(const std::vector<RateRow>& rows);

struct OracleCheckRow {
  double fee = 0.0;
  Money ccg_leader;
  Money ccg_follower;
  Money oracle_leader;
  Money oracle_follower;
  int iterations = 0;
  [[nodiscard]] bool match() const { return ccg_leader == oracle_leader && ccg_follower == oracle_follower; }
};

/// Compares run_ccg against the exhaustive bilevel search at every fee.
[[nodiscard]] std::vector<OracleCheckRow> run_oracle_check(const Instance& base, const std::vector<double>& fees,
                                                           const CcgOptions& options = {});
[[nodiscard]] std::string oracle_check_csv(const std::vector<OracleCheckRow>& rows);

}  // namespace elrp
