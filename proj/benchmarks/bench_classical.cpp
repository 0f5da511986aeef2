// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "husimi/classical_flow.hpp"

namespace {

husimi::Hamiltonian pick(int which) {
  switch (which) {
    case 0: return husimi::Hamiltonian::complex_oscillator(1.0, 0.15);
    case 1: return husimi::Hamiltonian::damped_kerr(0.05, 0.05, 1.0);
    default: return husimi::Hamiltonian::pt_kerr(0.25, 1.0);
  }
}

void BM_FlowSample(benchmark::State& state) {
  const auto h = pick(static_cast<int>(state.range(0)));
  husimi::Complex z{0.7, -1.2};
  for (auto _ : state) {
    const auto s = h.flow_sample(z);
    benchmark::DoNotOptimize(s);
    z += 1e-9 * s.dzeta;
  }
}
BENCHMARK(BM_FlowSample)->DenseRange(0, 2);

// One unit of backward time per cell at dt = 1e-3.
void BM_BacktraceGrid(benchmark::State& state) {
  const auto h = pick(static_cast<int>(state.range(0)));
  const int n = static_cast<int>(state.range(1));
  const husimi::PhaseGrid grid{-7, 7, -7, 7, n, n};
  const std::vector<double> times = {1.0};
  for (auto _ : state) {
    auto fields = husimi::backtrace_grid(h, grid, times, {}, 1);
    benchmark::DoNotOptimize(fields);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_BacktraceGrid)->Args({0, 41})->Args({1, 41})->Args({2, 41})->Unit(benchmark::kMillisecond);

void BM_FixedPoints(benchmark::State& state) {
  const auto h = pick(1);
  const auto seeds = husimi::seed_lattice(husimi::PhaseGrid{}, 15);
  for (auto _ : state) {
    auto found = husimi::find_fixed_points(h, seeds);
    benchmark::DoNotOptimize(found);
  }
}
BENCHMARK(BM_FixedPoints)->Unit(benchmark::kMillisecond);

}  // namespace
