#include <benchmark/benchmark.h>

#include "erpf/erpf.hpp"
#include "erpf/mandel.hpp"

using namespace erpf;

namespace {

const AssembledProblem& problem(Index a_over_h) {
  static AssembledProblem p10 = assemble_mandel(10, 1e-3);
  static AssembledProblem p20 = assemble_mandel(20, 1e-3);
  return a_over_h == 10 ? p10 : p20;
}

void BM_SpmvK(benchmark::State& state) {
  const CsrMatrix& K = problem(state.range(0)).system.K();
  Vector x(static_cast<std::size_t>(K.cols()), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(spmv(K, x));
  state.SetItemsProcessed(state.iterations() * K.nnz());
}
BENCHMARK(BM_SpmvK)->Arg(10)->Arg(20);

void BM_SpgemmQQt(benchmark::State& state) {
  const CsrMatrix& Q = problem(state.range(0)).system.Q();
  CsrMatrix Qt = Q.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(spgemm(Q, Qt));
}
BENCHMARK(BM_SpgemmQQt)->Arg(10)->Arg(20);

void BM_CholeskyK(benchmark::State& state) {
  const CsrMatrix& K = problem(state.range(0)).system.K();
  for (auto _ : state) benchmark::DoNotOptimize(cholesky_factor(K));
}
BENCHMARK(BM_CholeskyK)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_IncompleteCholeskyK(benchmark::State& state) {
  const CsrMatrix& K = problem(20).system.K();
  for (auto _ : state) benchmark::DoNotOptimize(ic_factor(K, state.range(0)));
}
BENCHMARK(BM_IncompleteCholeskyK)->Arg(0)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_PreconditionerApply(benchmark::State& state) {
  const AssembledProblem& pb = problem(state.range(0));
  PreconditionerConfig cfg;
  cfg.variant = static_cast<Variant>(state.range(1));
  Preconditioner M(pb.system, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(M.apply(pb.rhs));
}
BENCHMARK(BM_PreconditionerApply)
    ->ArgsProduct({{10, 20},
                   {static_cast<long>(Variant::rpf), static_cast<long>(Variant::erpf1),
                    static_cast<long>(Variant::erpf2_alt)}})
    ->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
