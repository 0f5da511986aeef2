// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "husimi/quantum_flow.hpp"

namespace {

void BM_Propagate(benchmark::State& state) {
  const auto h = husimi::Hamiltonian::damped_kerr(0.05, 0.05, 1.0);
  husimi::PropagationSettings ps;
  ps.n_max = static_cast<int>(state.range(0));
  const auto psi0 = husimi::displaced_fock_vector(2, husimi::PhasePoint{-3.0, 5.0}.z(), ps.n_max);
  for (auto _ : state) {
    auto psi = husimi::propagate(h, psi0, 0.1, ps);
    benchmark::DoNotOptimize(psi);
  }
}
BENCHMARK(BM_Propagate)->Arg(64)->Arg(110)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_QuantumHusimi(benchmark::State& state) {
  const int n_max = static_cast<int>(state.range(0));
  const auto psi = husimi::displaced_fock_vector(3, husimi::PhasePoint{5.0, 3.0}.z(), n_max);
  const husimi::PhaseGrid grid{-7, 7, -7, 7, 101, 101};
  for (auto _ : state) {
    auto f = husimi::quantum_husimi(psi, grid, 1);
    benchmark::DoNotOptimize(f);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_QuantumHusimi)->Arg(110)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_FockMatrix(benchmark::State& state) {
  const auto h = husimi::Hamiltonian::pt_kerr(0.25, 1.0);
  for (auto _ : state) {
    auto k = h.fock_matrix(static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(k);
  }
}
BENCHMARK(BM_FockMatrix)->Arg(128)->Arg(512);

}  // namespace
