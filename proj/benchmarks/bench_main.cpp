// Copyright 2026 The hybridnn Authors.
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

#include <cmath>
#include <numbers>
#include <random>

#include "hybridnn/activations.hpp"
#include "hybridnn/audio.hpp"
#include "hybridnn/autodiff.hpp"
#include "hybridnn/experiments.hpp"
#include "hybridnn/layers.hpp"
#include "hybridnn/ops.hpp"

namespace {

using namespace hnn;

Tensor random_input(Domain d, Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  if (d == Domain::Real) {
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return Tensor::real(shape, std::move(v));
  }
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return Tensor::complex(shape, std::move(v));
}

// args: channels, kernel
void conv_forward_backward(benchmark::State& state, Domain d) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  ConvLayer conv({d, c, c, k, 1, 1, true}, rng);
  const Var x(random_input(d, {16, c, 99}, 2));
  const auto params = conv.parameters();
  for (auto _ : state) {
    Var y = conv.forward(x);
    Var loss = sum(abs(y));
    benchmark::DoNotOptimize(backward(loss, params));
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK_CAPTURE(conv_forward_backward, real, Domain::Real)->Args({16, 3})->Args({64, 3})->Args({64, 5});
BENCHMARK_CAPTURE(conv_forward_backward, complex, Domain::Complex)->Args({16, 3})->Args({64, 3})->Args({64, 5});

void stft_one_second(benchmark::State& state) {
  std::vector<double> w(kSampleRate);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::sin(2 * std::numbers::pi * 1000.0 * static_cast<double>(i) / kSampleRate);
  }
  for (auto _ : state) benchmark::DoNotOptimize(stft(w));
}
BENCHMARK(stft_one_second);

void audio_example(benchmark::State& state) {
  auto clips = make_synthetic_digits({.count = 10, .speakers = 2, .seed = 1});
  AudioPipeline p;
  p.snr_db = 0.0;
  const AudioSource src(clips, p);
  std::uint64_t access = 0;
  for (auto _ : state) benchmark::DoNotOptimize(src.get(3, access++));
}
BENCHMARK(audio_example);

void activation_forward(benchmark::State& state, const char* name) {
  const ActivationSpec spec = activation_by_name(name);
  const Var z(random_input(Domain::Complex, {64, 1024}, 3));
  for (auto _ : state) benchmark::DoNotOptimize(activate(spec, z));
  state.SetItemsProcessed(state.iterations() * 64 * 1024);
}
BENCHMARK_CAPTURE(activation_forward, cTanh, "cTanh");
BENCHMARK_CAPTURE(activation_forward, cReLU, "cReLU");
BENCHMARK_CAPTURE(activation_forward, cSoftPlus, "cSoftPlus");
BENCHMARK_CAPTURE(activation_forward, cRecipMax, "cRecipMax");

void hybrid_network_forward(benchmark::State& state) {
  const NetworkSpec spec = audio_hnn_spec();
  Network net(spec, 1);
  NetworkInput in;
  in.complex = Var(random_input(Domain::Complex, {8, 481, 99}, 4));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(in));
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(hybrid_network_forward);

}  // namespace

BENCHMARK_MAIN();
