#include <benchmark/benchmark.h>

#include "vortexlab/fields.hpp"
#include "vortexlab/quasimap.hpp"
#include "vortexlab/solver.hpp"

using namespace vortexlab;

namespace {

fields::GaugedField seed(int n_theta) {
  auto t = target::make_target(1, 1, {1}, {1.0});
  auto m = surface::cylinder(10, 0.1, n_theta);
  quasimap::Laurent p;
  p.coefficients = {1};
  p.zeros = {{Complex(0, 0)}};
  return quasimap::seed_from_laurent(t, m, p);
}

void BM_JacobianApply(benchmark::State& st) {
  auto f = seed(static_cast<int>(st.range(0)));
  solver::Jacobian J(f);
  RVec x(static_cast<size_t>(J.size()), 1.0), y;
  for (auto _ : st) {
    J.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * J.size());
}
BENCHMARK(BM_JacobianApply)->Arg(32)->Arg(64)->Arg(128);

void BM_NewtonSolve(benchmark::State& st) {
  auto f = seed(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    auto r = solver::newton_solve(f, solver::SolveConfig{});
    benchmark::DoNotOptimize(r.report.final_energy);
  }
}
BENCHMARK(BM_NewtonSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
