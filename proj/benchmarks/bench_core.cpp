// Copyright 2026 The b92-keyrate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Microbenchmarks for the optimizer's hot path. One objective evaluation is
// joint_state + Choi eigenvalue + purify + three 4x4 entropies; a default
// key-rate point runs a few hundred thousand of them.

#include <benchmark/benchmark.h>

#include <random>

#include "b92/eve_objective.hpp"
#include "b92/optimizer.hpp"

namespace {

const b92::B92Context& context() {
  static const b92::B92Context ctx = b92::make_context(0.39);
  return ctx;
}

void BM_JointState(benchmark::State& state) {
  const b92::BlochAffineChannel ch = b92::depolarizing(0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(b92::joint_state(context(), ch));
  }
}
BENCHMARK(BM_JointState);

void BM_MinChoiEigenvalue(benchmark::State& state) {
  const b92::BlochAffineChannel ch = b92::depolarizing(0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(b92::min_choi_eigenvalue(ch));
  }
}
BENCHMARK(BM_MinChoiEigenvalue);

void BM_Purify(benchmark::State& state) {
  const b92::ComplexMatrix rho = b92::joint_state(context(), b92::depolarizing(0.05));
  for (auto _ : state) {
    benchmark::DoNotOptimize(b92::purify(rho));
  }
}
BENCHMARK(BM_Purify);

void BM_EveAmbiguity(benchmark::State& state) {
  const b92::BlochAffineChannel ch = b92::depolarizing(0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(b92::eve_ambiguity(context(), ch).value);
  }
}
BENCHMARK(BM_EveAmbiguity);

void BM_HermitianEig(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  b92::ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      m(i, j) = b92::Complex(gauss(rng), gauss(rng));
    }
  }
  m = (m + m.adjoint()).eval() / 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(b92::hermitian_eig(m));
  }
}
BENCHMARK(BM_HermitianEig)->Arg(4)->Arg(16)->Arg(32);

void BM_KeyRatePoint(benchmark::State& state) {
  b92::OptimizationConfig cfg;
  cfg.restarts = 1;
  cfg.max_iterations = 2000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(b92::key_rate(context(), 0.06, cfg).key_rate);
  }
}
BENCHMARK(BM_KeyRatePoint)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
