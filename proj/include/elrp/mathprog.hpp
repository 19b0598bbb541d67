#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace elrp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Le, Ge, Eq };
enum class Status { Optimal, Infeasible, Unbounded };

[[nodiscard]] const char* to_string(Status s);

/// Minimization model with bounded columns and ranged-free rows.
class Model {
 public:
  int add_column(std::string name, double lb, double ub, double obj, bool integer = false);
  int add_row(std::string name, Sense sense, double rhs);
  /// Adds `value` to the coefficient of column `col` in row `row`.
  void add_coef(int row, int col, double value);

  [[nodiscard]] int num_columns() const { return static_cast<int>(col_name_.size()); }
  [[nodiscard]] int num_rows() const { return static_cast<int>(row_name_.size()); }

  [[nodiscard]] const std::string& column_name(int j) const { return col_name_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] const std::string& row_name(int i) const { return row_name_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] double lower(int j) const { return lb_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] double upper(int j) const { return ub_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] double objective(int j) const { return obj_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] bool is_integer(int j) const { return integer_[static_cast<std::size_t>(j)] != 0; }
  [[nodiscard]] Sense sense(int i) const { return sense_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] double rhs(int i) const { return rhs_[static_cast<std::size_t>(i)]; }
  /// Nonzeros of column j as (row, value), in insertion order.
  [[nodiscard]] const std::vector<std::pair<int, double>>& column(int j) const {
    return cols_[static_cast<std::size_t>(j)];
  }

  void set_bounds(int j, double lb, double ub);
  void set_objective(int j, double obj) { obj_[static_cast<std::size_t>(j)] = obj; }
  void set_rhs(int i, double rhs) { rhs_[static_cast<std::size_t>(i)] = rhs; }

  /// Throws DomainError on NaN/infinite data or unbounded integer columns.
  void validate() const;

 private:
  std::vector<std::string> col_name_;
  std::vector<double> lb_, ub_, obj_;
  std::vector<char> integer_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<std::string> row_name_;
  std::vector<Sense> sense_;
  std::vector<double> rhs_;
};

struct Solution {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> primal;
  /// Row duals y with reduced costs c - y^T A. Non-positive on <= rows, non-negative on >= rows.
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  int iterations = 0;
  // Branch and bound only.
  double best_bound = 0.0;
  int nodes = 0;
};

struct SimplexOptions {
  double feasibility_tol = 1e-8;
  double optimality_tol = 1e-9;
  int refactor_every = 100;
  int degenerate_before_bland = 1000;
  int max_iterations = 0;  // 0: automatic, scaled with model size
};

/// Bounded revised simplex. Throws NumericalError when it cannot finish.
[[nodiscard]] Solution solve_lp(const Model& model, const SimplexOptions& options = {});

struct MilpOptions {
  double gap = 1e-6;
  double integrality_tol = 1e-6;
  int max_nodes = 200'000;
  SimplexOptions simplex;
};

/// Best-bound branch and bound, branching on the most fractional column.
[[nodiscard]] Solution solve_milp(const Model& model, const MilpOptions& options = {});

/// CPLEX-LP text of the model.
[[nodiscard]] std::string write_lp(const Model& model);

}  // namespace elrp::lp
