// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <cmath>

#include "husimi/grid_io.hpp"

namespace {

husimi::ScalarField sample_field() {
  husimi::ScalarField f(husimi::PhaseGrid{}, {husimi::FieldKind::kHusimiClassical, 1.0, "x", 1.0});
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto pt = f.grid.point(i);
    f.values[i] = std::exp(-0.5 * (pt.q * pt.q + pt.p * pt.p));
  }
  return f;
}

void BM_Encode(benchmark::State& state) {
  const auto f = sample_field();
  for (auto _ : state) {
    auto bytes = husimi::encode_field(f);
    benchmark::DoNotOptimize(bytes);
  }
  state.SetBytesProcessed(state.iterations() * static_cast<long>(f.size() * 8));
}
BENCHMARK(BM_Encode);

void BM_Decode(benchmark::State& state) {
  const auto bytes = husimi::encode_field(sample_field());
  for (auto _ : state) {
    auto f = husimi::decode_field(bytes);
    benchmark::DoNotOptimize(f);
  }
  state.SetBytesProcessed(state.iterations() * static_cast<long>(bytes.size()));
}
BENCHMARK(BM_Decode);

void BM_Integrate(benchmark::State& state) {
  const auto f = sample_field();
  for (auto _ : state) benchmark::DoNotOptimize(husimi::integrate_field(f));
}
BENCHMARK(BM_Integrate);

}  // namespace
