#include <benchmark/benchmark.h>

#include "hypf/geodesic.hpp"
#include "scenarios.hpp"

using namespace hypf;

namespace {

PhaseSystem plane_wells() {
  PhaseVec a(2), b(2), c(2);
  a << 1, 0;
  b << 0, 1;
  c << 0, 0;
  return PhaseSystem(PotentialFamily::ProductOfSquares, {a, b, c}, 1.5);
}

void BM_DoubleWellDistance(benchmark::State& state) {
  const GeodesicSolver solver(cli::classic_double_well());
  const PhaseVec a = PhaseVec::Constant(1, -1.0), b = PhaseVec::Constant(1, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solver.distance(a, b));
}
BENCHMARK(BM_DoubleWellDistance);

void BM_PlaneDistanceField(benchmark::State& state) {
  const GeodesicSolver solver(plane_wells());
  for (auto _ : state) benchmark::DoNotOptimize(solver.distance_field(solver.system().well(0)));
}
BENCHMARK(BM_PlaneDistanceField)->Unit(benchmark::kMillisecond);

void BM_PlaneDistanceMatrix(benchmark::State& state) {
  const GeodesicSolver solver(plane_wells());
  for (auto _ : state) benchmark::DoNotOptimize(phase_distance_matrix(solver));
}
BENCHMARK(BM_PlaneDistanceMatrix)->Unit(benchmark::kMillisecond);

}  // namespace
