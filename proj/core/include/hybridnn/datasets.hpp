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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "hybridnn/hybrid_graph.hpp"
#include "hybridnn/tensor.hpp"
#include "hybridnn/training.hpp"

namespace hnn {

/// Periodic Hann window of length n: 0.5 - 0.5 cos(2 pi k / n).
std::vector<double> hann_window(std::size_t n);

struct SinusoidParams {
  double a = 1.0;  // amplitude
  double m = 8.0;  // frequency in cycles per frame
  double p = 0.0;  // phase in radians
};

struct SinusoidOptions {
  std::size_t length = 512;  // N
  std::size_t bins = 18;
  double noise_max = 0.01;
};

/// Windowed DFT features of y(n) = a e^{i(2 pi n m / N + p)} + v(n):
/// the first `bins` bins interleaved as (re0, im0, re1, im1, ...).
std::vector<double> sinusoid_predictors(const SinusoidParams& params,
                                        std::span<const cplx> noise = {},
                                        const SinusoidOptions& options = {});

/// Targets (m, a sin p, a cos p).
std::array<double, 3> sinusoid_targets(const SinusoidParams& params);

struct SinusoidDataset {
  Tensor predictors;  // [count, 2 * bins]
  Tensor targets;     // [count, 3]
  std::vector<SinusoidParams> params;
};

/// a ~ U[0.1, 1], m ~ U[5, 12], p ~ U[-pi, pi]; v(n) = r e^{i phi} with
/// r ~ U[0, noise_max]. Sample i depends only on (seed, i).
SinusoidDataset generate_sinusoid_dataset(std::size_t count, std::uint64_t seed,
                                          const SinusoidOptions& options = {});

/// Train/validation/test index lists.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

/// Per-label shuffle; round(val_fraction * n) and round(test_fraction * n)
/// examples of every label go to validation and test, the rest to training.
Split stratified_split(std::span<const int> labels, std::uint64_t seed, double val_fraction = 0.1,
                       double test_fraction = 0.1);

nlohmann::json split_to_json(const Split& split);
Split split_from_json(const nlohmann::json& j);
void save_split(const Split& split, const std::filesystem::path& path);
Split load_split(const std::filesystem::path& path);

struct ToyOptions {
  std::size_t count = 200;
  std::size_t classes = 2;
  std::size_t channels = 4;
  std::size_t length = 8;
  IoDomain domain = IoDomain::Real;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// Class templates plus Gaussian noise; templates are random unit-magnitude
/// patterns (random phases for complex features). Labels cycle 0..classes-1.
InMemorySource make_toy_source(const ToyOptions& options);

std::vector<int> labels_of(const ExampleSource& source);

}  // namespace hnn
