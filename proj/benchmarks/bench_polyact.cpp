#include <benchmark/benchmark.h>

#include "polyact/experiments.hpp"
#include "polyact/hierarchy.hpp"
#include "polyact/momentsdp.hpp"
#include "polyact/popbuild.hpp"

using namespace polyact;

namespace {

SyntheticInstance family_instance(int family, int width) {
  return make_instance(family_config(accuracy_families()[static_cast<std::size_t>(family)], width, 20, 0.0, 7));
}

void BM_AveragedResidual(benchmark::State& state) {
  const auto inst = family_instance(1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(averaged_residual(inst.net, inst.train));
}
BENCHMARK(BM_AveragedResidual)->Arg(5)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_AssembleRelaxation(benchmark::State& state) {
  const auto inst = family_instance(0, 8);
  const auto pop = build_pop(inst.net, inst.train);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_relaxation(pop, k));
}
BENCHMARK(BM_AssembleRelaxation)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SolveWorkedExample(benchmark::State& state) {
  const auto pop = build_pop(worked_example_network(), worked_example_data());
  const auto relax = assemble_relaxation(pop, static_cast<int>(state.range(0)));
  SolverOptions opts = HierarchyOptions::default_solver();
  for (auto _ : state) benchmark::DoNotOptimize(solve_sdp(relax, opts));
}
BENCHMARK(BM_SolveWorkedExample)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_FamilyHierarchy(benchmark::State& state) {
  const auto inst = family_instance(static_cast<int>(state.range(0)), 6);
  const auto pop = build_pop(inst.net, inst.train);
  for (auto _ : state) benchmark::DoNotOptimize(solve_hierarchy(pop, pop.k0() + 1));
}
BENCHMARK(BM_FamilyHierarchy)->DenseRange(0, 3)->Unit(benchmark::kSecond)->Iterations(1);

void BM_FlatTruncation(benchmark::State& state) {
  const auto pop = build_pop(worked_example_network(), worked_example_data());
  const TmsIndex idx(pop.n, 6);
  std::vector<double> z = {1.0, -2.0, 1.0, -1.0, 0.0};
  const auto w = dirac_moments(idx, z);
  for (auto _ : state) benchmark::DoNotOptimize(flat_truncation(w, pop.n, 3, 1, 1e-3));
}
BENCHMARK(BM_FlatTruncation);

}  // namespace

BENCHMARK_MAIN();
