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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridnn/analysis.hpp"
#include "hybridnn/audio.hpp"
#include "hybridnn/datasets.hpp"
#include "hybridnn/hybrid_graph.hpp"
#include "hybridnn/layers.hpp"
#include "hybridnn/training.hpp"

namespace hnn {

// Sinusoid regression: an RVNN maps windowed DFT bins to (m, a sin p, a cos p).
struct SinusoidExperimentOptions {
  std::size_t count = 50000;
  std::size_t epochs = 300;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  std::vector<std::size_t> widths = {18, 14, 4, 3};
  std::string activation = "ELU";
  SinusoidOptions data;
  std::uint64_t seed = 0;
};

nlohmann::json sinusoid_options_to_json(const SinusoidExperimentOptions& o);
SinusoidExperimentOptions sinusoid_options_from_json(const nlohmann::json& j,
                                                     SinusoidExperimentOptions defaults = {});

struct SinusoidExperimentResult {
  Mlp mlp;
  /// Index 0 is the loss before training.
  std::vector<double> loss;
};

/// Training data for the given options, drawn from the options' seed.
SinusoidDataset sinusoid_data(const SinusoidExperimentOptions& o);

/// Untrained network for the given options, drawn from the options' seed.
Mlp sinusoid_network(const SinusoidExperimentOptions& o);
SinusoidExperimentResult run_sinusoid_experiment(const SinusoidExperimentOptions& o);

struct LayerDecoding {
  WeightMap map;        // normalised, bias in column 0
  WeightMap reordered;  // rows sorted by similarity
  ComplexBlockReport blocks;
  std::vector<int> bias_signs;  // in reordered row order
};

LayerDecoding decode_layer(const Mlp& mlp, std::size_t layer, double tolerance);
nlohmann::json layer_decoding_to_json(const LayerDecoding& d);

// Spoken-digit classification data.
enum class AudioDataKind { Synthetic, AudioMnist };

struct AudioDataConfig {
  AudioDataKind kind = AudioDataKind::Synthetic;
  std::filesystem::path root;
  SyntheticDigitOptions synthetic;
  /// Seeded subset of at most this many clips; 0 keeps everything.
  std::size_t limit = 0;
  AudioPipeline pipeline;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t split_seed = 0;
};

nlohmann::json audio_data_config_to_json(const AudioDataConfig& c);
AudioDataConfig audio_data_config_from_json(const nlohmann::json& j, AudioDataConfig defaults = {});

std::shared_ptr<const ClipCollection> load_clips(const AudioDataConfig& c);

struct AudioTask {
  std::shared_ptr<AudioSource> source;
  Split split;
};

AudioTask make_audio_task(const AudioDataConfig& c);

struct AudioModelOptions {
  std::size_t first_channels = 8;
  std::size_t channels = 16;
  std::size_t classes = 10;
};

/// Three-block hybrid network on complex spectrograms: complex and
/// magnitude paths at the input, real paths afterwards.
NetworkSpec audio_hnn_spec(const AudioModelOptions& o = {});

/// Real-only network on interleaved spectrograms with the same layout.
/// The width of the first block is the one whose parameter count is closest
/// to `target_params`.
NetworkSpec audio_rvnn_spec(std::size_t target_params, const AudioModelOptions& o = {});

struct TrainedModel {
  Network network;
  TrainReport report;
};

/// Network weights, hyperparameter seed and noise draws all follow `seed`.
TrainedModel train_audio_model(const NetworkSpec& spec, const AudioTask& task, Hyperparams hp,
                               std::uint64_t seed);

}  // namespace hnn
