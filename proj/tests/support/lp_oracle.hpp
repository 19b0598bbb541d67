#pragma once

#include "elrp/mathprog.hpp"

namespace elrp::testing {

/// Lagrangian dual value of a solution, rebuilt from its duals and the model data only.
double dual_objective(const lp::Model& m, const lp::Solution& s);

/// Row duals carry the sign their row sense requires.
bool dual_signs_ok(const lp::Model& m, const lp::Solution& s);

/// Minimum of a bounded integer program by visiting every integer point.
double enumerate_ip(const lp::Model& m, bool& feasible);

}  // namespace elrp::testing
