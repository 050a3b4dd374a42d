// Copyright 2026 The AHSC Authors
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

#include <cstddef>
#include <vector>

#include <benchmark/benchmark.h>

#include "ahsc/convexity.h"
#include "ahsc/data.h"
#include "ahsc/nn.h"

namespace ahsc {
namespace {

Dataset Blobs(std::size_t m_per_class) {
  BlobSpec spec;
  spec.m_per_class = m_per_class;
  spec.k = 3;
  spec.dim = 4;
  return synthetic_blobs(spec);
}

Model MakeModel(std::size_t width, std::size_t depth) {
  std::vector<std::size_t> dims{4};
  for (std::size_t i = 0; i < depth; ++i) dims.push_back(width);
  dims.push_back(3);
  return init_model(dims, 1);
}

void BM_ForwardBackward(benchmark::State& state) {
  const Model model = MakeModel(static_cast<std::size_t>(state.range(0)), 2);
  const Dataset data = Blobs(64);
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15,
                                     16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31};
  const Batch b = gather(data, idx);
  for (auto _ : state) {
    const ForwardCache cache = forward(model, b.features);
    benchmark::DoNotOptimize(backward(model, cache, b.labels));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(16)->Arg(128)->Arg(1024);

void BM_ProxyBatch(benchmark::State& state) {
  const Model model = MakeModel(static_cast<std::size_t>(state.range(0)), 2);
  const Batch b = whole(Blobs(11));
  for (auto _ : state) benchmark::DoNotOptimize(sc_proxy_batch(model, b));
}
BENCHMARK(BM_ProxyBatch)->Arg(16)->Arg(64)->Arg(128);

// Same shapes as BM_ProxyBatch: the finite-difference oracle the proxy
// stands in for.
void BM_LastLayerHessianOracle(benchmark::State& state) {
  const Model model = MakeModel(static_cast<std::size_t>(state.range(0)), 2);
  const Batch b = whole(Blobs(11));
  for (auto _ : state) benchmark::DoNotOptimize(last_layer_hessian_norm(model, b));
}
BENCHMARK(BM_LastLayerHessianOracle)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_MuMax(benchmark::State& state) {
  const Model model = MakeModel(64, 2);
  const Dataset data = Blobs(100);
  const auto batch = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mu_max(model, data, batch));
}
BENCHMARK(BM_MuMax)->Arg(8)->Arg(32)->Arg(128);

void BM_TrainEpoch(benchmark::State& state) {
  const Dataset data = Blobs(100);
  HyperConfig hp;
  hp.width = static_cast<int>(state.range(0));
  hp.depth = 2;
  hp.batch_size = 32;
  hp.learning_rate = 1e-3;
  const Model model = init_model(hp.LayerDims(4, 3), 1);
  for (auto _ : state) benchmark::DoNotOptimize(train(model, data, hp, 1, false, 1));
}
BENCHMARK(BM_TrainEpoch)->Arg(16)->Arg(128);

}  // namespace
}  // namespace ahsc

BENCHMARK_MAIN();
