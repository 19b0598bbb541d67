#include "elrp/mathprog.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "elrp/errors.hpp"
#include "elrp/log.hpp"

namespace elrp::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "?";
}

int Model::add_column(std::string name, double lb, double ub, double obj, bool integer) {
  col_name_.push_back(std::move(name));
  lb_.push_back(lb);
  ub_.push_back(ub);
  obj_.push_back(obj);
  integer_.push_back(integer ? 1 : 0);
  cols_.emplace_back();
  return num_columns() - 1;
}

int Model::add_row(std::string name, Sense sense, double rhs) {
  row_name_.push_back(std::move(name));
  sense_.push_back(sense);
  rhs_.push_back(rhs);
  return num_rows() - 1;
}

void Model::add_coef(int row, int col, double value) {
  auto& c = cols_[static_cast<std::size_t>(col)];
  for (auto& [r, v] : c) {
    if (r == row) {
      v += value;
      return;
    }
  }
  c.emplace_back(row, value);
}

void Model::set_bounds(int j, double lb, double ub) {
  lb_[static_cast<std::size_t>(j)] = lb;
  ub_[static_cast<std::size_t>(j)] = ub;
}

void Model::validate() const {
  for (int j = 0; j < num_columns(); ++j) {
    if (std::isnan(lower(j)) || std::isnan(upper(j)) || lower(j) > upper(j) || lower(j) == kInf ||
        upper(j) == -kInf) {
      throw DomainError(fmt::format("column '{}' has invalid bounds", column_name(j)));
    }
    if (!std::isfinite(objective(j))) throw DomainError(fmt::format("column '{}' has a non-finite cost", column_name(j)));
    if (is_integer(j) && (!std::isfinite(lower(j)) || !std::isfinite(upper(j)))) {
      throw DomainError(fmt::format("integer column '{}' must be bounded", column_name(j)));
    }
    for (auto [i, v] : column(j)) {
      if (i < 0 || i >= num_rows() || !std::isfinite(v)) {
        throw DomainError(fmt::format("column '{}' has an invalid coefficient", column_name(j)));
      }
    }
  }
  for (int i = 0; i < num_rows(); ++i) {
    if (!std::isfinite(rhs(i))) throw DomainError(fmt::format("row '{}' has a non-finite rhs", row_name(i)));
  }
}

namespace {

constexpr double kPivotTol = 1e-9;

enum class VarState { Basic, AtLower, AtUpper, Free };

class Simplex {
 public:
  Simplex(const Model& model, const SimplexOptions& opt) : model_(model), opt_(opt) {
    n_ = model.num_columns();
    m_ = model.num_rows();
    for (int j = 0; j < n_; ++j) {
      cols_.push_back(model.column(j));
      lb_.push_back(model.lower(j));
      ub_.push_back(model.upper(j));
    }
    for (int i = 0; i < m_; ++i) {
      cols_.push_back({{i, 1.0}});
      switch (model.sense(i)) {
        case Sense::Le: lb_.push_back(0.0), ub_.push_back(kInf); break;
        case Sense::Ge: lb_.push_back(-kInf), ub_.push_back(0.0); break;
        case Sense::Eq: lb_.push_back(0.0), ub_.push_back(0.0); break;
      }
      b_.push_back(model.rhs(i));
    }
    max_iter_ = opt.max_iterations > 0 ? opt.max_iterations : 20000 + 50 * (n_ + 2 * m_);
  }

  Solution run() {
    initial_basis();
    Solution sol;
    if (num_artificial_ > 0) {
      cost_.assign(cols_.size(), 0.0);
      for (std::size_t j = static_cast<std::size_t>(n_ + m_); j < cols_.size(); ++j) cost_[j] = 1.0;
      if (iterate() != Status::Optimal) throw NumericalError("phase 1 reported an unbounded direction");
      double infeas = 0.0;
      for (std::size_t j = static_cast<std::size_t>(n_ + m_); j < cols_.size(); ++j) infeas += x_[j];
      if (infeas > residual_tol()) {
        sol.status = Status::Infeasible;
        sol.iterations = iterations_;
        return sol;
      }
      for (std::size_t j = static_cast<std::size_t>(n_ + m_); j < cols_.size(); ++j) {
        lb_[j] = 0.0;
        ub_[j] = 0.0;
        if (state_[j] != VarState::Basic) {
          state_[j] = VarState::AtLower;
          x_[j] = 0.0;
        }
      }
      drive_out_artificials();
    }
    cost_.assign(cols_.size(), 0.0);
    for (int j = 0; j < n_; ++j) cost_[static_cast<std::size_t>(j)] = model_.objective(j);
    const Status st = iterate();
    sol.iterations = iterations_;
    if (st == Status::Unbounded) {
      sol.status = Status::Unbounded;
      return sol;
    }
    refactor();
    finish(sol);
    return sol;
  }

 private:
  [[nodiscard]] double tol_d(std::size_t j) const { return opt_.optimality_tol * (1.0 + std::abs(cost_[j])); }
  [[nodiscard]] bool fixed(std::size_t j) const { return lb_[j] == ub_[j]; }

  // Phase-one residual still counted as round-off.
  [[nodiscard]] double residual_tol() const {
    double scale = 1.0;
    for (double v : b_) scale = std::max(scale, std::abs(v));
    return opt_.feasibility_tol + 1e-9 * scale;
  }

  void initial_basis() {
    const std::size_t nm = static_cast<std::size_t>(n_ + m_);
    x_.assign(nm, 0.0);
    state_.assign(nm, VarState::AtLower);
    for (std::size_t j = 0; j < static_cast<std::size_t>(n_); ++j) {
      if (std::isfinite(lb_[j])) {
        x_[j] = lb_[j];
        state_[j] = VarState::AtLower;
      } else if (std::isfinite(ub_[j])) {
        x_[j] = ub_[j];
        state_[j] = VarState::AtUpper;
      } else {
        x_[j] = 0.0;
        state_[j] = VarState::Free;
      }
    }
    std::vector<double> r = b_;
    for (std::size_t j = 0; j < static_cast<std::size_t>(n_); ++j) {
      if (x_[j] == 0.0) continue;
      for (auto [i, v] : cols_[j]) r[static_cast<std::size_t>(i)] -= v * x_[j];
    }
    head_.assign(static_cast<std::size_t>(m_), -1);
    binv_.assign(static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i) {
      const std::size_t s = static_cast<std::size_t>(n_ + i);
      const double ri = r[static_cast<std::size_t>(i)];
      if (ri >= lb_[s] - opt_.feasibility_tol && ri <= ub_[s] + opt_.feasibility_tol) {
        state_[s] = VarState::Basic;
        x_[s] = ri;
        head_[static_cast<std::size_t>(i)] = static_cast<int>(s);
        binv(i, i) = 1.0;
        continue;
      }
      state_[s] = lb_[s] == 0.0 ? VarState::AtLower : VarState::AtUpper;
      x_[s] = 0.0;
      const double sign = ri > 0.0 ? 1.0 : -1.0;
      cols_.push_back({{i, sign}});
      lb_.push_back(0.0);
      ub_.push_back(kInf);
      x_.push_back(std::abs(ri));
      state_.push_back(VarState::Basic);
      head_[static_cast<std::size_t>(i)] = static_cast<int>(cols_.size()) - 1;
      binv(i, i) = sign;
      ++num_artificial_;
    }
  }

  double& binv(int i, int k) {
    return binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(k)];
  }
  [[nodiscard]] double binv(int i, int k) const {
    return binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(k)];
  }

  std::vector<double> duals() const {
    std::vector<double> y(static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i) {
      const double c = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])];
      if (c == 0.0) continue;
      for (int k = 0; k < m_; ++k) y[static_cast<std::size_t>(k)] += c * binv(i, k);
    }
    return y;
  }

  [[nodiscard]] double reduced(std::size_t j, const std::vector<double>& y) const {
    double d = cost_[j];
    for (auto [i, v] : cols_[j]) d -= y[static_cast<std::size_t>(i)] * v;
    return d;
  }

  std::vector<double> ftran(std::size_t j) const {
    std::vector<double> a(static_cast<std::size_t>(m_), 0.0);
    for (auto [k, v] : cols_[j]) {
      for (int i = 0; i < m_; ++i) a[static_cast<std::size_t>(i)] += binv(i, k) * v;
    }
    return a;
  }

  void pivot(int r, std::size_t q, const std::vector<double>& alpha) {
    const double p = alpha[static_cast<std::size_t>(r)];
    for (int k = 0; k < m_; ++k) binv(r, k) /= p;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = alpha[static_cast<std::size_t>(i)];
      if (f == 0.0) continue;
      for (int k = 0; k < m_; ++k) binv(i, k) -= f * binv(r, k);
    }
    head_[static_cast<std::size_t>(r)] = static_cast<int>(q);
    state_[q] = VarState::Basic;
  }

  /// Rebuilds B^-1 by Gauss-Jordan elimination and recomputes basic values.
  void refactor() {
    const auto m = static_cast<std::size_t>(m_);
    std::vector<double> bmat(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (auto [k, v] : cols_[static_cast<std::size_t>(head_[i])]) bmat[static_cast<std::size_t>(k) * m + i] = v;
    }
    std::vector<double> inv(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) inv[i * m + i] = 1.0;
    for (std::size_t c = 0; c < m; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < m; ++r) {
        if (std::abs(bmat[r * m + c]) > std::abs(bmat[piv * m + c])) piv = r;
      }
      if (std::abs(bmat[piv * m + c]) < 1e-12) throw NumericalError("basis matrix became singular");
      if (piv != c) {
        for (std::size_t k = 0; k < m; ++k) {
          std::swap(bmat[piv * m + k], bmat[c * m + k]);
          std::swap(inv[piv * m + k], inv[c * m + k]);
        }
      }
      const double p = bmat[c * m + c];
      for (std::size_t k = 0; k < m; ++k) {
        bmat[c * m + k] /= p;
        inv[c * m + k] /= p;
      }
      for (std::size_t r = 0; r < m; ++r) {
        if (r == c) continue;
        const double f = bmat[r * m + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m; ++k) {
          bmat[r * m + k] -= f * bmat[c * m + k];
          inv[r * m + k] -= f * inv[c * m + k];
        }
      }
    }
    binv_ = std::move(inv);
    std::vector<double> r = b_;
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
      for (auto [i, v] : cols_[j]) r[static_cast<std::size_t>(i)] -= v * x_[j];
    }
    for (int i = 0; i < m_; ++i) {
      double v = 0.0;
      for (int k = 0; k < m_; ++k) v += binv(i, k) * r[static_cast<std::size_t>(k)];
      x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = v;
    }
  }

  Status iterate() {
    int since_refactor = 0;
    int degenerate = 0;
    bool bland = false;
    while (true) {
      if (++iterations_ > max_iter_) {
        throw NumericalError(fmt::format("simplex exceeded {} iterations", max_iter_));
      }
      if (++since_refactor >= opt_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
      const std::vector<double> y = duals();
      std::size_t q = cols_.size();
      double best = 0.0;
      double dir = 0.0;
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (state_[j] == VarState::Basic || fixed(j)) continue;
        const double d = reduced(j, y);
        const double tol = tol_d(j);
        double gain = 0.0;
        double jd = 0.0;
        if (d < -tol && (state_[j] == VarState::AtLower || state_[j] == VarState::Free)) {
          gain = -d;
          jd = 1.0;
        } else if (d > tol && (state_[j] == VarState::AtUpper || state_[j] == VarState::Free)) {
          gain = d;
          jd = -1.0;
        }
        if (jd == 0.0) continue;
        if (bland) {
          q = j;
          dir = jd;
          break;
        }
        if (gain > best) {
          best = gain;
          q = j;
          dir = jd;
        }
      }
      if (q == cols_.size()) return Status::Optimal;

      const std::vector<double> alpha = ftran(q);
      // Harris ratio test: bound the step with tolerance-relaxed bounds, then
      // take the largest pivot among rows blocking within that step.
      auto step_to_bound = [&](int i, double relax) {
        const auto bj = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
        const double delta = -dir * alpha[static_cast<std::size_t>(i)];
        if (delta < 0.0 && std::isfinite(lb_[bj])) return (std::max(0.0, x_[bj] - lb_[bj]) + relax) / -delta;
        if (delta > 0.0 && std::isfinite(ub_[bj])) return (std::max(0.0, ub_[bj] - x_[bj]) + relax) / delta;
        return kInf;
      };
      double theta_max = kInf;
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha[static_cast<std::size_t>(i)]) < kPivotTol) continue;
        theta_max = std::min(theta_max, step_to_bound(i, bland ? 0.0 : opt_.feasibility_tol));
      }
      double theta = kInf;
      int leave = -1;
      double leave_alpha = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = alpha[static_cast<std::size_t>(i)];
        if (std::abs(a) < kPivotTol) continue;
        const double t = step_to_bound(i, 0.0);
        if (!std::isfinite(t) || t > theta_max + 1e-12) continue;
        bool take = leave < 0;
        if (!take && bland) {
          take = t < theta - 1e-12 ||
                 (t <= theta + 1e-12 && head_[static_cast<std::size_t>(i)] < head_[static_cast<std::size_t>(leave)]);
        } else if (!take) {
          take = std::abs(a) > std::abs(leave_alpha);
        }
        if (take) {
          theta = t;
          leave = i;
          leave_alpha = a;
        }
      }
      const double span = ub_[q] - lb_[q];
      const bool flip = std::isfinite(span) && span <= theta;
      if (flip) theta = span;
      if (!std::isfinite(theta)) return Status::Unbounded;

      if (theta < 1e-12) {
        if (++degenerate >= opt_.degenerate_before_bland && !bland) {
          bland = true;
          log().debug("simplex: switching to Bland's rule after {} degenerate pivots", degenerate);
        }
      } else {
        degenerate = 0;
      }
      x_[q] += dir * theta;
      for (int i = 0; i < m_; ++i) {
        x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] -= dir * theta * alpha[static_cast<std::size_t>(i)];
      }
      if (flip) {
        state_[q] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
        x_[q] = dir > 0 ? ub_[q] : lb_[q];
        continue;
      }
      const auto out = static_cast<std::size_t>(head_[static_cast<std::size_t>(leave)]);
      const double delta = -dir * alpha[static_cast<std::size_t>(leave)];
      if (delta < 0.0) {
        x_[out] = lb_[out];
        state_[out] = VarState::AtLower;
      } else {
        x_[out] = ub_[out];
        state_[out] = VarState::AtUpper;
      }
      pivot(leave, q, alpha);
    }
  }

  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      const auto bj = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
      if (bj < static_cast<std::size_t>(n_ + m_)) continue;
      std::size_t best = cols_.size();
      double best_abs = 1e-7;
      for (std::size_t j = 0; j < static_cast<std::size_t>(n_ + m_); ++j) {
        if (state_[j] == VarState::Basic) continue;
        double a = 0.0;
        for (auto [k, v] : cols_[j]) a += binv(r, k) * v;
        if (std::abs(a) > best_abs) {
          best_abs = std::abs(a);
          best = j;
        }
      }
      if (best == cols_.size()) continue;  // redundant row; artificial stays basic at zero
      const std::vector<double> alpha = ftran(best);
      x_[bj] = 0.0;
      state_[bj] = VarState::AtLower;
      pivot(r, best, alpha);
    }
    refactor();
  }

  void finish(Solution& sol) {
    const std::vector<double> y = duals();
    sol.status = Status::Optimal;
    sol.primal.assign(static_cast<std::size_t>(n_), 0.0);
    sol.reduced_costs.assign(static_cast<std::size_t>(n_), 0.0);
    sol.duals = y;
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double clamp_shift = 0.0;  // objective moved by snapping basics onto their bounds
    for (int i = 0; i < m_; ++i) dual_obj += b_[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      const double d = reduced(j, y);
      double xj = std::clamp(x_[j], lb_[j], ub_[j]);
      if (state_[j] == VarState::Basic && std::abs(x_[j] - xj) > opt_.feasibility_tol * (1.0 + std::abs(xj)) * 10 + residual_tol()) {
        throw NumericalError(fmt::format("basic variable {} is out of bounds by {}", j, std::abs(x_[j] - xj)));
      }
      // Lagrangian contribution: bounded variables sit at the bound the sign of d asks for.
      double contrib = d * xj;
      if (d > tol_d(j) * 10) {
        if (!std::isfinite(lb_[j])) throw NumericalError("dual infeasible at optimum");
        contrib = d * lb_[j];
      } else if (d < -tol_d(j) * 10) {
        if (!std::isfinite(ub_[j])) throw NumericalError("dual infeasible at optimum");
        contrib = d * ub_[j];
      }
      dual_obj += contrib;
      if (j < static_cast<std::size_t>(n_)) {
        sol.primal[j] = xj;
        sol.reduced_costs[j] = d;
        clamp_shift += std::abs(cost_[j] * (x_[j] - xj));
        primal_obj += cost_[j] * xj;
      }
    }
    // Primal feasibility on the original rows.
    std::vector<double> act(static_cast<std::size_t>(m_), 0.0);
    for (int j = 0; j < n_; ++j) {
      for (auto [i, v] : cols_[static_cast<std::size_t>(j)]) act[static_cast<std::size_t>(i)] += v * sol.primal[static_cast<std::size_t>(j)];
    }
    for (int i = 0; i < m_; ++i) {
      const double viol = [&] {
        const double a = act[static_cast<std::size_t>(i)];
        const double b = b_[static_cast<std::size_t>(i)];
        switch (model_.sense(i)) {
          case Sense::Le: return std::max(0.0, a - b);
          case Sense::Ge: return std::max(0.0, b - a);
          case Sense::Eq: return std::abs(a - b);
        }
        return 0.0;
      }();
      if (viol > 1e-6 * (1.0 + std::abs(b_[static_cast<std::size_t>(i)]))) {
        throw NumericalError(fmt::format("row '{}' violated by {} at the optimum", model_.row_name(i), viol));
      }
    }
    if (std::abs(primal_obj - dual_obj) > 1e-7 * std::max(1.0, std::abs(primal_obj)) + clamp_shift) {
      throw NumericalError(fmt::format("duality gap {} at the optimum", primal_obj - dual_obj));
    }
    sol.objective = primal_obj;
  }

  const Model& model_;
  SimplexOptions opt_;
  int n_ = 0;
  int m_ = 0;
  int max_iter_ = 0;
  int iterations_ = 0;
  int num_artificial_ = 0;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lb_, ub_, cost_, x_, b_;
  std::vector<VarState> state_;
  std::vector<int> head_;
  std::vector<double> binv_;
};

}  // namespace

Solution solve_lp(const Model& model, const SimplexOptions& options) {
  model.validate();
  if (model.num_rows() == 0) {
    Solution sol;
    sol.status = Status::Optimal;
    for (int j = 0; j < model.num_columns(); ++j) {
      const double c = model.objective(j);
      double x = 0.0;
      if (c > 0.0) x = model.lower(j);
      else if (c < 0.0) x = model.upper(j);
      else x = std::isfinite(model.lower(j)) ? model.lower(j) : (std::isfinite(model.upper(j)) ? model.upper(j) : 0.0);
      if (!std::isfinite(x)) {
        sol.status = Status::Unbounded;
        return sol;
      }
      sol.primal.push_back(x);
      sol.reduced_costs.push_back(c);
      sol.objective += c * x;
    }
    return sol;
  }
  return Simplex(model, options).run();
}

Solution solve_milp(const Model& model, const MilpOptions& options) {
  model.validate();
  struct Node {
    double bound;
    int id;
    std::vector<double> lb, ub;
  };
  auto cmp = [](const Node& a, const Node& b) { return std::tie(a.bound, a.id) > std::tie(b.bound, b.id); };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);
  Model work = model;
  std::vector<double> lb0(static_cast<std::size_t>(model.num_columns())), ub0(lb0.size());
  for (int j = 0; j < model.num_columns(); ++j) {
    lb0[static_cast<std::size_t>(j)] = model.lower(j);
    ub0[static_cast<std::size_t>(j)] = model.upper(j);
  }
  int next_id = 0;
  open.push({-kInf, next_id++, lb0, ub0});
  Solution incumbent;
  incumbent.status = Status::Infeasible;
  double incumbent_obj = kInf;
  double root_obj = -kInf;
  int nodes = 0;
  int iterations = 0;
  double best_bound = -kInf;
  auto closed = [&](double bound) {
    return bound >= incumbent_obj - options.gap * std::max(1.0, std::abs(incumbent_obj));
  };

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    best_bound = node.bound;
    if (closed(node.bound)) {
      best_bound = incumbent_obj;
      break;
    }
    if (nodes >= options.max_nodes) {
      log().warn("branch and bound stopped at the node limit ({}), bound {} incumbent {}", options.max_nodes,
                 node.bound, incumbent_obj);
      break;
    }
    ++nodes;
    for (int j = 0; j < model.num_columns(); ++j) {
      work.set_bounds(j, node.lb[static_cast<std::size_t>(j)], node.ub[static_cast<std::size_t>(j)]);
    }
    Solution relax = solve_lp(work, options.simplex);
    iterations += relax.iterations;
    if (relax.status == Status::Unbounded) {
      if (nodes == 1) {
        relax.nodes = nodes;
        return relax;
      }
      throw NumericalError("unbounded relaxation below the root of a bounded-root model");
    }
    if (relax.status == Status::Infeasible) continue;
    if (nodes == 1) root_obj = relax.objective;
    if (closed(relax.objective)) continue;
    int branch = -1;
    double most = 0.0;
    for (int j = 0; j < model.num_columns(); ++j) {
      if (!model.is_integer(j)) continue;
      const double v = relax.primal[static_cast<std::size_t>(j)];
      const double frac = std::abs(v - std::round(v));
      if (frac > options.integrality_tol && frac > most + 1e-12) {
        most = frac;
        branch = j;
      }
    }
    if (branch < 0) {
      for (int j = 0; j < model.num_columns(); ++j) {
        if (model.is_integer(j)) relax.primal[static_cast<std::size_t>(j)] = std::round(relax.primal[static_cast<std::size_t>(j)]);
      }
      incumbent = relax;
      incumbent_obj = relax.objective;
      continue;
    }
    const double v = relax.primal[static_cast<std::size_t>(branch)];
    Node down{relax.objective, next_id++, node.lb, node.ub};
    down.ub[static_cast<std::size_t>(branch)] = std::floor(v);
    Node up{relax.objective, next_id++, node.lb, node.ub};
    up.lb[static_cast<std::size_t>(branch)] = std::ceil(v);
    open.push(std::move(down));
    open.push(std::move(up));
  }
  if (open.empty() && incumbent.status == Status::Optimal) best_bound = incumbent_obj;
  incumbent.nodes = nodes;
  incumbent.iterations = iterations;
  incumbent.best_bound = std::min(best_bound, incumbent_obj);
  incumbent.duals.clear();
  if (incumbent.status == Status::Optimal && incumbent_obj < root_obj - 1e-6 * std::max(1.0, std::abs(root_obj))) {
    throw NumericalError("integer solution below the LP relaxation bound");
  }
  return incumbent;
}

namespace {

std::string lp_number(double v) { return fmt::format("{:.12g}", v); }

std::string lp_name(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') ? c : '_';
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out = "_" + out;
  return out;
}

}  // namespace

std::string write_lp(const Model& model) {
  std::ostringstream out;
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(model.num_rows()));
  for (int j = 0; j < model.num_columns(); ++j) {
    for (auto [i, v] : model.column(j)) rows[static_cast<std::size_t>(i)].emplace_back(j, v);
  }
  auto term = [&](double v, int j, bool first) {
    std::string s;
    if (v < 0) s = first ? "- " : " - ";
    else s = first ? "" : " + ";
    if (std::abs(v) != 1.0) s += lp_number(std::abs(v)) + " ";
    return s + lp_name(model.column_name(j));
  };
  out << "Minimize\n obj:";
  bool first = true;
  for (int j = 0; j < model.num_columns(); ++j) {
    if (model.objective(j) == 0.0) continue;
    out << " " << term(model.objective(j), j, first);
    first = false;
  }
  if (first) out << " 0";
  out << "\nSubject To\n";
  for (int i = 0; i < model.num_rows(); ++i) {
    out << " " << lp_name(model.row_name(i)) << ":";
    bool f = true;
    for (auto [j, v] : rows[static_cast<std::size_t>(i)]) {
      out << " " << term(v, j, f);
      f = false;
    }
    if (f) out << " 0 " << lp_name(model.column_name(0));
    const char* op = model.sense(i) == Sense::Le ? "<=" : model.sense(i) == Sense::Ge ? ">=" : "=";
    out << " " << op << " " << lp_number(model.rhs(i)) << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < model.num_columns(); ++j) {
    const std::string name = lp_name(model.column_name(j));
    const double lb = model.lower(j);
    const double ub = model.upper(j);
    if (!std::isfinite(lb) && !std::isfinite(ub)) {
      out << " " << name << " free\n";
    } else if (!std::isfinite(lb)) {
      out << " -inf <= " << name << " <= " << lp_number(ub) << "\n";
    } else if (!std::isfinite(ub)) {
      out << " " << name << " >= " << lp_number(lb) << "\n";
    } else {
      out << " " << lp_number(lb) << " <= " << name << " <= " << lp_number(ub) << "\n";
    }
  }
  bool any_int = false;
  for (int j = 0; j < model.num_columns(); ++j) {
    if (!model.is_integer(j)) continue;
    if (!any_int) out << "General\n";
    any_int = true;
    out << " " << lp_name(model.column_name(j)) << "\n";
  }
  out << "End\n";
  return out.str();
}

}  // namespace elrp::lp
