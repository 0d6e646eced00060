#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "crdp/binary_analytic.hpp"
#include "crdp/solver.hpp"

namespace {

const crdp::MarkovSource& source() {
  static const crdp::MarkovSource s = crdp::binary_markov_source(0.55, 0.45);
  return s;
}

const crdp::DistortionSpec& dist() {
  static const crdp::DistortionSpec d = crdp::consecutive_ones_distortion();
  return d;
}

void BM_StationarySolve(benchmark::State& state) {
  crdp::SolverConfig cfg;
  cfg.slope = std::log(0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(crdp::solve_fixed_point(source(), dist(), cfg));
  }
}
BENCHMARK(BM_StationarySolve);

void BM_ExactSolve(benchmark::State& state) {
  crdp::SolverConfig cfg;
  cfg.mode = crdp::HorizonMode::exact;
  cfg.horizon = static_cast<int>(state.range(0));
  cfg.slope = std::log(0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(crdp::solve_fixed_point(source(), dist(), cfg));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExactSolve)->Arg(2)->Arg(4)->Arg(6);

void BM_TargetSolve(benchmark::State& state) {
  crdp::SolverConfig base;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        crdp::solve_for_target_distortion(source(), dist(), base, 0.2));
  }
}
BENCHMARK(BM_TargetSolve);

void BM_CurveSweep(benchmark::State& state) {
  std::vector<double> slopes;
  for (int k = 1; k <= 16; ++k) {
    const double d = 0.3 * k / 17.0;
    slopes.push_back(std::log(d / (1.0 - d)));
  }
  crdp::SolverConfig base;
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        crdp::sweep_curve(source(), dist(), base, slopes, threads));
  }
}
BENCHMARK(BM_CurveSweep)->Arg(1)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
