// Serial and OpenMP variants of the parallel kernels, side by side.

#include <benchmark/benchmark.h>

#include <omp.h>

#include <memory>
#include <string>

#include "elrp/colgen.hpp"
#include "elrp/experiment.hpp"
#include "elrp/oracle.hpp"

using namespace elrp;

namespace {

std::string data(const char* name) { return std::string(ELRP_DATA_DIR) + "/" + name; }

const PtenGraph& small_base() {
  static const PtenGraph g = expand(std::make_shared<const Instance>(load_instance(data("small_base.json"))));
  return g;
}

const PtenGraph& toy() {
  static const PtenGraph g = expand(std::make_shared<const Instance>(load_instance(data("toy.json"))));
  return g;
}

// Column generation for the follower master with every station fully built;
// arg 0 prices vehicle types one after another, arg 1 in parallel.
void BM_ColumnGeneration(benchmark::State& state) {
  const PtenGraph& g = small_base();
  MasterSpec spec;
  for (const StationCandidate& s : g.instance().stations()) spec.ports.push_back(s.size_max);
  ColgenOptions opt;
  opt.parallel_pricing = state.range(0) != 0;
  for (auto _ : state) {
    ColumnPool pool;
    benchmark::DoNotOptimize(run_column_generation(g, spec, pool, opt).lp_bound);
  }
}
BENCHMARK(BM_ColumnGeneration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BilevelExhaustiveSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(oracle::bilevel_exhaustive_serial(toy()).leader_cost);
}
BENCHMARK(BM_BilevelExhaustiveSerial)->Unit(benchmark::kMillisecond);

void BM_BilevelExhaustiveParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(oracle::bilevel_exhaustive(toy()).leader_cost);
}
BENCHMARK(BM_BilevelExhaustiveParallel)->Unit(benchmark::kMillisecond);

// Fee sweep on the toy with `jobs` fee points in flight.
void BM_FeeSweep(benchmark::State& state) {
  const Instance& base = toy().instance();
  const auto fees = parse_fee_grid("0:0.5:0.05");
  SweepOptions opt;
  opt.jobs = static_cast<int>(state.range(0));
  opt.single_entity = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_fee_sweep(base, fees, opt).size());
}
BENCHMARK(BM_FeeSweep)->Arg(1)->Arg(omp_get_max_threads() > 1 ? omp_get_max_threads() : 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
