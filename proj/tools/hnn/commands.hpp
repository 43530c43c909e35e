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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hnn::cli {

struct Context {
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::filesystem::path out = "out";

  /// Keys under `name` if present, otherwise the whole config.
  nlohmann::json section(const std::string& name) const;
};

struct GenSinusoidArgs {
  std::optional<std::size_t> count;
  std::optional<double> noise_max;
};

struct AudioDataArgs {
  std::optional<std::string> dataset;  // prepared dataset.json
  std::optional<std::string> root;     // AudioMNIST directory
  std::optional<std::size_t> synthetic_count;
  std::optional<std::size_t> limit;
  std::optional<double> snr_db;
};

struct TrainArgs {
  std::string model = "hnn";
  std::optional<std::string> spec;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
  std::optional<std::size_t> batch_size;
  AudioDataArgs data;
};

struct SearchArgs {
  std::optional<std::string> task;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> min_params;
  std::optional<std::size_t> max_params;
  std::optional<std::size_t> threads;
  AudioDataArgs data;
};

struct DecodeArgs {
  std::string checkpoint;
  std::size_t layer = 0;
  double tolerance = 0.15;
};

struct ProbeArgs {
  std::string checkpoint;
  double amplitude = 1.0;
  double frequency = 8.0;
  std::size_t resolution = 64;
};

struct ReportArgs {
  std::vector<std::string> runs;
  std::optional<std::string> trials;
  std::optional<std::string> spec;
};

struct CropArgs {
  std::string checkpoint;
  double limit = 0.8;
  double step = 0.1;
  AudioDataArgs data;
};

void gen_sinusoid(const Context& ctx, const GenSinusoidArgs& args);
void prep_audio(const Context& ctx, const AudioDataArgs& args);
void train_model(const Context& ctx, const TrainArgs& args);
void search(const Context& ctx, const SearchArgs& args);
void decode_weights(const Context& ctx, const DecodeArgs& args);
void probe_phase(const Context& ctx, const ProbeArgs& args);
void report(const Context& ctx, const ReportArgs& args);
void crop_sweep_command(const Context& ctx, const CropArgs& args);

}  // namespace hnn::cli
