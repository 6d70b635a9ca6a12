// Copyright 2026 The Affordlab Authors.
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

#include <algorithm>

#include "affordlab/metrics.hpp"
#include "affordlab/ontology.hpp"
#include "affordlab/sampler.hpp"
#include "affordlab/trainer.hpp"

namespace affordlab {
namespace {

SyntheticOntologySpec scaled_spec(std::size_t affordances) {
  SyntheticOntologySpec spec;
  spec.affordances = affordances;
  spec.concepts = affordances * 590 / 686;
  spec.parts = affordances * 1172 / 686;
  spec.superordinates = std::max<std::size_t>(2, affordances * 30 / 686);
  return spec;
}

void BM_BuildProximity(benchmark::State& state) {
  const auto o = synthetic_ontology(scaled_spec(static_cast<std::size_t>(state.range(0))), 1);
  const auto store = synthetic_embeddings(o, 32, 1);
  for (auto _ : state) {
    auto m = build_proximity_matrix(o, store, DistanceConfig{}, {static_cast<std::size_t>(state.range(1))});
    benchmark::DoNotOptimize(m.packed().data());
  }
}
BENCHMARK(BM_BuildProximity)->Args({100, 1})->Args({300, 1})->Args({300, 4})->Unit(benchmark::kMillisecond);

void BM_SampleAndSplit(benchmark::State& state) {
  const auto o = synthetic_ontology(scaled_spec(200), 2);
  const auto m = build_proximity_matrix(o, synthetic_embeddings(o, 32, 2), DistanceConfig{});
  SamplePlan plan;
  for (auto _ : state) {
    auto stages = split_curriculum(sample_uniform_spectrum(m, plan).pairs);
    benchmark::DoNotOptimize(stages[0].pairs.data());
    ++plan.seed;
  }
}
BENCHMARK(BM_SampleAndSplit)->Unit(benchmark::kMillisecond);

void BM_TripletStep(benchmark::State& state) {
  const DenoiserShape shape;
  ToyDenoiser model(shape, 1);
  Rng rng(2);
  TripletBatch b;
  b.positive.values.resize(shape.latent_dim);
  b.negative.values.resize(shape.latent_dim);
  b.condition.resize(shape.cond_dim);
  for (auto& x : b.positive.values) x = rng.normal();
  for (auto& x : b.negative.values) x = rng.normal();
  for (auto& x : b.condition) x = rng.normal();
  const auto s = NoiseSchedule::linear();
  AdamW opt(AdamWConfig{}, kToyLearningRate, model.parameter_count());
  std::vector<double> grad(model.parameter_count());
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    auto terms = triplet_loss(b, model, s, 0.5, rng, grad);
    opt.step(model.parameters(), grad);
    benchmark::DoNotOptimize(terms.loss);
  }
}
BENCHMARK(BM_TripletStep);

}  // namespace
}  // namespace affordlab

BENCHMARK_MAIN();
