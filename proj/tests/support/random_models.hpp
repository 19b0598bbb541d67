#pragma once

#include <cstdint>
#include <memory>

#include "elrp/instance.hpp"
#include "elrp/mathprog.hpp"
#include "elrp/spprc.hpp"

namespace elrp::testing {

/// Feasible, bounded LP: box-bounded columns, rows built around a random interior point.
lp::Model random_lp(std::uint64_t seed, int rows, int cols);

/// Pure integer program over small integer boxes; may be infeasible.
lp::Model random_ip(std::uint64_t seed, int cols);

struct RandomInstanceShape {
  int max_customers = 4;
  int max_stations = 2;
  int max_horizon = 10;
  int max_ports = 2;
};

/// Small instance on an integer grid with Manhattan distances, so that energy
/// and time arithmetic is exact.
InstanceData random_instance(std::uint64_t seed, const RandomInstanceShape& shape = {});

/// Pricing context with random duals for `instance`.
PricingContext random_context(std::uint64_t seed, const Instance& instance, int vehicle_type);

/// Directory holding the bundled instance files.
std::string data_dir();

}  // namespace elrp::testing
