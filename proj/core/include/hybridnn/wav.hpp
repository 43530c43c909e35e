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
#include <span>
#include <vector>

namespace hnn {

struct WavData {
  std::uint32_t sample_rate = 0;
  std::uint16_t channels = 0;
  std::vector<double> samples;  // mono, scaled to [-1, 1]
};

/// Reads a RIFF/WAVE file holding 16-bit PCM mono audio. Throws DataError
/// naming the file for anything else.
WavData read_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono; samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               std::uint32_t sample_rate);

}  // namespace hnn
