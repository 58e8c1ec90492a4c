// Copyright 2026 The weaktrace authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "weaktrace/scenarios.hpp"

namespace {

using namespace weaktrace;

constexpr double kS = 0.70710678118654752;

const Network& canonical() {
  static const Network net = build_network(fig1_network_text(kS));
  return net;
}

void BM_ParseAndValidate(benchmark::State& state) {
  const std::string text = fig1_network_text(kS);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_network(text));
  }
}
BENCHMARK(BM_ParseAndValidate);

void BM_Compile(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(compile(canonical()));
  }
}
BENCHMARK(BM_Compile);

void BM_ForwardState(benchmark::State& state) {
  const StagePlan plan = compile(canonical());
  const Preselection pre = Preselection::from_source(plan);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_state(plan, pre, "L5"));
  }
}
BENCHMARK(BM_ForwardState);

void BM_PathWeakValues(benchmark::State& state) {
  const StagePlan plan = compile(canonical());
  const Preselection pre = Preselection::from_source(plan);
  const Postselection post = Postselection::on_detector(plan, "D");
  for (auto _ : state) {
    benchmark::DoNotOptimize(path_weak_values(plan, pre, post, "L3"));
  }
}
BENCHMARK(BM_PathWeakValues);

void BM_PresenceMap(benchmark::State& state) {
  const StagePlan plan = compile(canonical());
  const Preselection pre = Preselection::from_source(plan);
  const Postselection post = Postselection::on_detector(plan, "D");
  for (auto _ : state) {
    benchmark::DoNotOptimize(presence_map(plan, pre, post, "L3"));
  }
}
BENCHMARK(BM_PresenceMap);

void BM_JointEvolutionTwoProbes(benchmark::State& state) {
  const StagePlan plan = compile(canonical());
  const Preselection pre = Preselection::from_source(plan);
  const Postselection post = Postselection::on_detector(plan, "D");
  InstrumentedNetwork in(canonical());
  in = attach_probe(in, {"C", {"pC", QubitPointer{1e-2}}});
  in = attach_probe(in, {"F", {"pF", QubitPointer{1e-2}}});
  for (auto _ : state) {
    benchmark::DoNotOptimize(postselect(evolve_joint(in, pre), post));
  }
}
BENCHMARK(BM_JointEvolutionTwoProbes);

void BM_RunFig1(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(fig1_nested(kS)));
  }
}
BENCHMARK(BM_RunFig1);

}  // namespace

BENCHMARK_MAIN();
