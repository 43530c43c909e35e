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

#include "hybridnn/audio.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "hybridnn/datasets.hpp"
#include "hybridnn/errors.hpp"
#include "hybridnn/seed.hpp"
#include "hybridnn/wav.hpp"

namespace hnn {
namespace {

constexpr double kPi = std::numbers::pi;

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n_fft)
      : in(static_cast<double*>(fftw_malloc(sizeof(double) * n_fft))),
        out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n_fft / 2 + 1)))) {
    if (!in || !out) throw std::bad_alloc();
  }
  ~FftwBuffer() {
    fftw_free(in);
    fftw_free(out);
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  double* in;
  fftw_complex* out;
};

// FFTW planning is not thread-safe; plans are created once per size under a
// lock and then executed with the new-array interface.
fftw_plan r2c_plan(std::size_t n_fft) {
  static std::mutex mutex;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find(n_fft);
  if (it != plans.end()) return it->second;
  FftwBuffer scratch(n_fft);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), scratch.in, scratch.out,
                                        FFTW_ESTIMATE);
  if (!plan) throw NumericError("FFTW could not plan a transform of size " + std::to_string(n_fft));
  plans.emplace(n_fft, plan);
  return plan;
}

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

// (F1, F2) in Hz for ten vowel qualities.
constexpr std::array<std::array<double, 2>, 10> kVowels = {{{270, 2290},
                                                            {530, 1840},
                                                            {730, 1090},
                                                            {570, 840},
                                                            {300, 870},
                                                            {660, 1720},
                                                            {640, 1190},
                                                            {390, 1990},
                                                            {440, 1020},
                                                            {490, 1350}}};

std::vector<float> synthesize_digit(int digit, std::uint64_t clip_seed, std::uint64_t speaker_seed) {
  Rng srng(speaker_seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double f0_base = 95.0 + 135.0 * u01(srng);
  const double tract = 0.9 + 0.22 * u01(srng);
  const double tempo = 0.85 + 0.3 * u01(srng);

  Rng rng(clip_seed);
  const double duration = std::clamp((0.35 + 0.3 * u01(rng)) * tempo, 0.3, 0.7);
  const auto n = static_cast<std::size_t>(duration * static_cast<double>(kSampleRate));
  const double split = (0.4 + 0.2 * u01(rng)) * static_cast<double>(n);
  const double blend = 0.06 * static_cast<double>(kSampleRate);
  const double f0 = f0_base * (0.95 + 0.1 * u01(rng));
  const auto& va = kVowels[static_cast<std::size_t>(digit)];
  const auto& vb = kVowels[static_cast<std::size_t>((3 * digit + 5) % 10)];
  const double fs = static_cast<double>(kSampleRate);
  const double attack = 0.025 * fs, release = 0.06 * fs;

  std::normal_distribution<double> breath(0.0, 0.005);
  const auto harmonics = static_cast<std::size_t>(5000.0 / (f0 * 0.9));
  std::vector<double> amp(harmonics + 1, 0.0);
  std::vector<double> x(n);
  double theta = 2.0 * kPi * u01(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    const double pitch = f0 * (1.1 - 0.2 * t / static_cast<double>(n));
    if (i % 48 == 0) {
      const double w = smoothstep((t - split) / blend + 0.5);
      const double f1 = tract * ((1 - w) * va[0] + w * vb[0]);
      const double f2 = tract * ((1 - w) * va[1] + w * vb[1]);
      for (std::size_t h = 1; h <= harmonics; ++h) {
        const double f = static_cast<double>(h) * pitch;
        const double r1 = (f - f1) / 90.0, r2 = (f - f2) / 130.0;
        amp[h] = f < 0.5 * fs ? (1.0 / (1.0 + r1 * r1) + 0.7 / (1.0 + r2 * r2)) /
                                    std::sqrt(static_cast<double>(h))
                              : 0.0;
      }
    }
    theta += 2.0 * kPi * pitch / fs;
    if (theta > 2.0 * kPi) theta -= 2.0 * kPi;
    const cplx z = std::polar(1.0, theta);
    cplx p = z;
    double s = 0.0;
    for (std::size_t h = 1; h <= harmonics; ++h) {
      s += amp[h] * p.imag();
      p *= z;
    }
    const double env = std::min({1.0, t / attack, (static_cast<double>(n) - t) / release});
    x[i] = env * s + breath(rng);
  }
  const auto normed = rms_normalize(x);
  return {normed.begin(), normed.end()};
}

}  // namespace

Tensor stft(std::span<const double> waveform, const StftOptions& options) {
  const std::size_t n_fft = options.n_fft, hop = options.hop;
  if (n_fft < 2 || hop == 0) throw ArgumentError("STFT needs n_fft >= 2 and hop >= 1");
  if (waveform.size() < n_fft) {
    throw DataError("STFT input of " + std::to_string(waveform.size()) +
                    " samples is shorter than n_fft " + std::to_string(n_fft));
  }
  const std::size_t frames = (waveform.size() - n_fft) / hop + 1;
  const std::size_t bins = n_fft / 2 + 1;
  static thread_local std::vector<double> window;
  if (window.size() != n_fft) window = hann_window(n_fft);
  fftw_plan plan = r2c_plan(n_fft);
  FftwBuffer buf(n_fft);
  std::vector<cplx> out(bins * frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const double* src = waveform.data() + f * hop;
    for (std::size_t k = 0; k < n_fft; ++k) buf.in[k] = src[k] * window[k];
    fftw_execute_dft_r2c(plan, buf.in, buf.out);
    for (std::size_t b = 0; b < bins; ++b) out[b * frames + f] = {buf.out[b][0], buf.out[b][1]};
  }
  return Tensor::complex({bins, frames}, std::move(out));
}

Tensor magnitude_compress(const Tensor& z, double exponent) {
  if (!z.is_complex()) throw ShapeError("magnitude compression expects a complex tensor");
  if (!(exponent > 0.0)) throw ArgumentError("compression exponent must be positive");
  std::vector<cplx> out(z.complex_data().begin(), z.complex_data().end());
  const bool root = exponent == 0.5;
  for (auto& v : out) {
    const double m = std::abs(v);
    if (m > 0.0) v *= root ? 1.0 / std::sqrt(m) : std::pow(m, exponent - 1.0);
  }
  return Tensor::complex(z.shape(), std::move(out));
}

double signal_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

std::vector<double> rms_normalize(std::span<const double> x) {
  const double rms = std::sqrt(signal_power(x));
  std::vector<double> out(x.begin(), x.end());
  if (rms > 0.0) {
    for (auto& v : out) v /= rms;
  }
  return out;
}

std::vector<double> add_noise_snr(std::span<const double> waveform, double snr_db,
                                  std::uint64_t seed, std::optional<double> reference_power) {
  std::vector<double> out(waveform.begin(), waveform.end());
  if (std::isinf(snr_db) && snr_db > 0) return out;
  if (std::isnan(snr_db)) throw ArgumentError("SNR must not be NaN");
  const double power = reference_power.value_or(signal_power(waveform));
  if (power < 0.0) throw ArgumentError("reference power must be nonnegative");
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  for (auto& v : out) v += g(rng);
  return out;
}

ShiftMode ShiftMode::random_offset(std::uint64_t seed, std::uint64_t index, std::uint64_t access) {
  ShiftMode m;
  m.kind = Kind::RandomOffset;
  m.seed = seed;
  m.index = index;
  m.access = access;
  return m;
}

ShiftMode ShiftMode::crop(double ratio) {
  if (!(ratio >= -1.0 && ratio <= 1.0)) throw ArgumentError("crop ratio must lie in [-1, 1]");
  ShiftMode m;
  m.kind = Kind::Crop;
  m.ratio = ratio;
  return m;
}

std::vector<double> pad_and_shift(std::span<const double> content, const ShiftMode& mode,
                                  std::size_t window) {
  if (window == 0) throw ArgumentError("window must be positive");
  const std::size_t len = std::min(content.size(), window);
  std::vector<double> out(window, 0.0);
  if (mode.kind == ShiftMode::Kind::RandomOffset) {
    Rng rng(derive_seed(mode.seed, {mode.index, mode.access, 0x5f1f7}));
    std::uniform_int_distribution<std::size_t> offset(0, window - len);
    const std::size_t start = offset(rng);
    std::copy_n(content.begin(), len, out.begin() + static_cast<std::ptrdiff_t>(start));
    return out;
  }
  const auto cut =
      static_cast<std::size_t>(std::llround(std::abs(mode.ratio) * static_cast<double>(window)));
  if (mode.ratio <= 0.0) {
    // Start-aligned; the first `cut` samples of the window are removed.
    for (std::size_t i = cut; i < len; ++i) out[i - cut] = content[i];
  } else {
    // End-aligned; the last `cut` samples of the window are zeroed.
    const std::size_t start = window - len;
    std::copy_n(content.begin(), len, out.begin() + static_cast<std::ptrdiff_t>(start));
    std::fill(out.end() - static_cast<std::ptrdiff_t>(std::min(cut, window)), out.end(), 0.0);
  }
  return out;
}

Tensor interleave_for_rvnn(const Tensor& z) {
  if (!z.is_complex() || z.dim() != 2) throw ShapeError("interleave expects complex [freq, time]");
  const std::size_t f = z.shape()[0], t = z.shape()[1];
  std::vector<double> out(2 * f * t);
  const auto d = z.complex_data();
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      out[(2 * i) * t + j] = d[i * t + j].real();
      out[(2 * i + 1) * t + j] = d[i * t + j].imag();
    }
  }
  return Tensor::real({2 * f, t}, std::move(out));
}

Tensor deinterleave(const Tensor& x) {
  if (x.is_complex() || x.dim() != 2 || x.shape()[0] % 2 != 0) {
    throw ShapeError("deinterleave expects real [2 freq, time]");
  }
  const std::size_t f = x.shape()[0] / 2, t = x.shape()[1];
  std::vector<cplx> out(f * t);
  const auto d = x.real_data();
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = 0; j < t; ++j) out[i * t + j] = {d[(2 * i) * t + j], d[(2 * i + 1) * t + j]};
  }
  return Tensor::complex({f, t}, std::move(out));
}

MemoryClips::MemoryClips(std::vector<Clip> clips) : clips_(std::move(clips)) {}

std::vector<double> MemoryClips::content(std::size_t index) const {
  const auto& s = clips_.at(index).samples;
  return {s.begin(), s.end()};
}

WavClips::WavClips(std::vector<Entry> entries) : entries_(std::move(entries)) {}

std::string WavClips::name(std::size_t index) const {
  return entries_.at(index).path.filename().string();
}

std::vector<double> WavClips::content(std::size_t index) const {
  const auto& e = entries_.at(index);
  const WavData wav = read_wav(e.path);
  if (wav.sample_rate != kSampleRate) {
    throw DataError(e.path.string() + ": sample rate " + std::to_string(wav.sample_rate) +
                    " Hz, expected 48000 Hz");
  }
  return rms_normalize(wav.samples);
}

std::shared_ptr<WavClips> load_audiomnist(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw DataError("dataset root " + root.string() + " is not a directory");
  std::vector<WavClips::Entry> entries;
  for (const auto& item : fs::recursive_directory_iterator(root)) {
    if (!item.is_regular_file() || item.path().extension() != ".wav") continue;
    const std::string stem = item.path().stem().string();
    const auto a = stem.find('_');
    const auto b = a == std::string::npos ? a : stem.find('_', a + 1);
    try {
      if (a == std::string::npos || b == std::string::npos) throw std::invalid_argument(stem);
      const int label = std::stoi(stem.substr(0, a));
      const int speaker = std::stoi(stem.substr(a + 1, b - a - 1));
      if (label < 0 || label > 9) throw std::invalid_argument(stem);
      entries.push_back({item.path(), label, speaker});
    } catch (const std::logic_error&) {
      throw DataError(item.path().string() + ": file name does not follow <digit>_<speaker>_<take>.wav");
    }
  }
  if (entries.empty()) throw DataError("no WAV files found below " + root.string());
  std::sort(entries.begin(), entries.end(),
            [](const auto& x, const auto& y) { return x.path < y.path; });
  return std::make_shared<WavClips>(std::move(entries));
}

std::shared_ptr<MemoryClips> make_synthetic_digits(const SyntheticDigitOptions& o) {
  if (o.count == 0 || o.speakers == 0) throw ConfigError("synthetic digits need count and speakers");
  std::vector<MemoryClips::Clip> clips(o.count);
  for (std::size_t i = 0; i < o.count; ++i) {
    const int digit = static_cast<int>(i % 10);
    const auto speaker = static_cast<int>((i / 10) % o.speakers);
    clips[i].label = digit;
    clips[i].speaker = speaker;
    clips[i].name = "synthetic_" + std::to_string(digit) + "_" + std::to_string(speaker) + "_" +
                    std::to_string(i);
    clips[i].samples = synthesize_digit(digit, derive_seed(o.seed, {i}),
                                        derive_seed(o.seed, {0x5bea4e, static_cast<std::uint64_t>(speaker)}));
  }
  return std::make_shared<MemoryClips>(std::move(clips));
}

nlohmann::json audio_pipeline_to_json(const AudioPipeline& p) {
  nlohmann::json j;
  j["snr_db"] = std::isinf(p.snr_db) ? nlohmann::json("inf") : nlohmann::json(p.snr_db);
  j["compress"] = p.compress;
  j["interleave"] = p.interleave;
  j["crop"] = p.crop ? nlohmann::json(*p.crop) : nlohmann::json(nullptr);
  j["random_shift"] = p.random_shift;
  j["seed"] = p.seed;
  j["n_fft"] = p.stft.n_fft;
  j["hop"] = p.stft.hop;
  j["window"] = p.window;
  return j;
}

AudioPipeline audio_pipeline_from_json(const nlohmann::json& j, AudioPipeline p) {
  try {
    if (j.contains("snr_db")) {
      const auto& s = j.at("snr_db");
      if (s.is_string()) {
        if (s.get<std::string>() != "inf") throw ConfigError("snr_db must be a number or \"inf\"");
        p.snr_db = std::numeric_limits<double>::infinity();
      } else if (s.is_null()) {
        p.snr_db = std::numeric_limits<double>::infinity();
      } else {
        p.snr_db = s.get<double>();
      }
    }
    p.compress = j.value("compress", p.compress);
    p.interleave = j.value("interleave", p.interleave);
    if (j.contains("crop")) {
      p.crop = j.at("crop").is_null() ? std::nullopt : std::optional<double>(j.at("crop").get<double>());
    }
    p.random_shift = j.value("random_shift", p.random_shift);
    p.seed = j.value("seed", p.seed);
    p.stft.n_fft = j.value("n_fft", p.stft.n_fft);
    p.stft.hop = j.value("hop", p.stft.hop);
    p.window = j.value("window", p.window);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed audio pipeline: ") + e.what());
  }
}

std::vector<double> audio_waveform(const ClipCollection& clips, const AudioPipeline& p,
                                   std::size_t index, std::uint64_t access) {
  const auto content = clips.content(index);
  ShiftMode mode = p.crop ? ShiftMode::crop(*p.crop)
                          : (p.random_shift ? ShiftMode::random_offset(p.seed, index, access)
                                            : ShiftMode::crop(0.0));
  auto wave = pad_and_shift(content, mode, p.window);
  const std::size_t used = std::min(content.size(), p.window);
  const double reference = signal_power(std::span<const double>(content.data(), used));
  return add_noise_snr(wave, p.snr_db, derive_seed(p.seed, {index, access, 0x7015e}), reference);
}

AudioSource::AudioSource(std::shared_ptr<const ClipCollection> clips, AudioPipeline pipeline)
    : clips_(std::move(clips)), pipeline_(std::move(pipeline)) {
  if (!clips_) throw ArgumentError("audio source needs a clip collection");
}

Example AudioSource::get(std::size_t index, std::uint64_t access) const {
  const auto wave = audio_waveform(*clips_, pipeline_, index, access);
  Tensor spec = stft(wave, pipeline_.stft);
  if (pipeline_.compress != 1.0) spec = magnitude_compress(spec, pipeline_.compress);
  Example ex;
  ex.label = clips_->label(index);
  if (pipeline_.interleave) {
    ex.real = interleave_for_rvnn(spec);
  } else {
    ex.complex = std::move(spec);
  }
  return ex;
}

}  // namespace hnn
