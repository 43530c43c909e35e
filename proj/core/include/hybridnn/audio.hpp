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
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hybridnn/tensor.hpp"
#include "hybridnn/training.hpp"

namespace hnn {

inline constexpr std::size_t kSampleRate = 48000;

struct StftOptions {
  std::size_t n_fft = 960;
  std::size_t hop = 480;
};

/// One-sided STFT with a periodic Hann window and no edge padding:
/// complex [n_fft / 2 + 1, (len - n_fft) / hop + 1].
Tensor stft(std::span<const double> waveform, const StftOptions& options = {});

/// z -> |z|^exponent e^{i arg z}; zero stays zero.
Tensor magnitude_compress(const Tensor& z, double exponent = 0.5);

double signal_power(std::span<const double> x);

/// Scales to unit RMS; all-zero input is returned unchanged.
std::vector<double> rms_normalize(std::span<const double> x);

/// Adds white Gaussian noise at `snr_db` relative to `reference_power`
/// (defaults to the power of `waveform`). An infinite SNR returns the input.
std::vector<double> add_noise_snr(std::span<const double> waveform, double snr_db,
                                  std::uint64_t seed,
                                  std::optional<double> reference_power = std::nullopt);

/// Placement of an utterance inside the fixed window.
struct ShiftMode {
  enum class Kind { RandomOffset, Crop };
  Kind kind = Kind::Crop;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::uint64_t access = 0;
  double ratio = 0.0;

  /// Uniform start offset drawn from (seed, index, access).
  static ShiftMode random_offset(std::uint64_t seed, std::uint64_t index, std::uint64_t access);
  /// ratio in [-1, 1]. ratio <= 0 places the content at the window start and
  /// removes the first |ratio| * window samples (the rest moves forward);
  /// ratio > 0 places the content at the window end and zeroes the last
  /// ratio * window samples.
  static ShiftMode crop(double ratio);
};

/// Zero-pads (or truncates) `content` to `window` samples per `mode`.
std::vector<double> pad_and_shift(std::span<const double> content, const ShiftMode& mode,
                                  std::size_t window = kSampleRate);

/// [freq, time] complex -> [2 freq, time] real with rows (re0, im0, re1, ...).
Tensor interleave_for_rvnn(const Tensor& z);
Tensor deinterleave(const Tensor& x);

/// Labelled utterances with RMS-normalised content.
class ClipCollection {
 public:
  virtual ~ClipCollection() = default;
  virtual std::size_t size() const = 0;
  virtual int label(std::size_t index) const = 0;
  virtual int speaker(std::size_t index) const = 0;
  virtual std::string name(std::size_t index) const = 0;
  virtual std::vector<double> content(std::size_t index) const = 0;
};

class MemoryClips : public ClipCollection {
 public:
  struct Clip {
    std::vector<float> samples;
    int label = 0;
    int speaker = 0;
    std::string name;
  };
  explicit MemoryClips(std::vector<Clip> clips);
  std::size_t size() const override { return clips_.size(); }
  int label(std::size_t index) const override { return clips_.at(index).label; }
  int speaker(std::size_t index) const override { return clips_.at(index).speaker; }
  std::string name(std::size_t index) const override { return clips_.at(index).name; }
  std::vector<double> content(std::size_t index) const override;

 private:
  std::vector<Clip> clips_;
};

/// WAV files read on demand. Files must be 16-bit PCM mono at 48 kHz.
class WavClips : public ClipCollection {
 public:
  struct Entry {
    std::filesystem::path path;
    int label = 0;
    int speaker = 0;
  };
  explicit WavClips(std::vector<Entry> entries);
  std::size_t size() const override { return entries_.size(); }
  int label(std::size_t index) const override { return entries_.at(index).label; }
  int speaker(std::size_t index) const override { return entries_.at(index).speaker; }
  std::string name(std::size_t index) const override;
  std::vector<double> content(std::size_t index) const override;

 private:
  std::vector<Entry> entries_;
};

/// Discovers `<digit>_<speaker>_<take>.wav` files below `root`, sorted by path.
std::shared_ptr<WavClips> load_audiomnist(const std::filesystem::path& root);

struct SyntheticDigitOptions {
  std::size_t count = 2000;
  std::size_t speakers = 20;
  std::uint64_t seed = 0;
};

/// Spoken-digit stand-in: every digit is a two-vowel harmonic utterance
/// (digit-specific formant pair sequence) voiced by a random speaker (pitch,
/// vocal-tract scale, tempo). Durations lie in [0.3, 0.7] s at 48 kHz.
/// Clip i depends only on (seed, i); labels cycle 0..9.
std::shared_ptr<MemoryClips> make_synthetic_digits(const SyntheticDigitOptions& options);

struct AudioPipeline {
  double snr_db = std::numeric_limits<double>::infinity();
  double compress = 0.5;
  bool interleave = false;
  /// When set, placement uses ShiftMode::crop(ratio) for every access.
  std::optional<double> crop;
  /// Without a crop: random offsets if true, start placement otherwise.
  bool random_shift = true;
  std::uint64_t seed = 0;
  StftOptions stft;
  std::size_t window = kSampleRate;
};

nlohmann::json audio_pipeline_to_json(const AudioPipeline& p);
AudioPipeline audio_pipeline_from_json(const nlohmann::json& j, AudioPipeline defaults = {});

/// Waveform for one access: placement, then noise.
std::vector<double> audio_waveform(const ClipCollection& clips, const AudioPipeline& pipeline,
                                   std::size_t index, std::uint64_t access);

/// Full front end: waveform -> STFT -> compression -> optional interleave.
/// Produces a complex [481, 99] example, or real [962, 99] when interleaved.
class AudioSource : public ExampleSource {
 public:
  AudioSource(std::shared_ptr<const ClipCollection> clips, AudioPipeline pipeline);
  std::size_t size() const override { return clips_->size(); }
  int label(std::size_t index) const override { return clips_->label(index); }
  Example get(std::size_t index, std::uint64_t access) const override;

  const AudioPipeline& pipeline() const { return pipeline_; }
  void set_pipeline(AudioPipeline pipeline) { pipeline_ = std::move(pipeline); }
  const ClipCollection& clips() const { return *clips_; }

 private:
  std::shared_ptr<const ClipCollection> clips_;
  AudioPipeline pipeline_;
};

}  // namespace hnn
