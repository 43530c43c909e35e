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

#include "hybridnn/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>

#include "hybridnn/errors.hpp"
#include "hybridnn/seed.hpp"

namespace hnn {
namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
  }
  return w;
}

std::vector<double> sinusoid_predictors(const SinusoidParams& params, std::span<const cplx> noise,
                                        const SinusoidOptions& options) {
  const std::size_t n_len = options.length;
  if (!noise.empty() && noise.size() != n_len) {
    throw ArgumentError("noise length must equal the frame length");
  }
  if (options.bins > n_len) throw ArgumentError("more bins than DFT points");
  static thread_local std::vector<double> window;
  if (window.size() != n_len) window = hann_window(n_len);

  std::vector<cplx> y(n_len);
  const double n_d = static_cast<double>(n_len);
  for (std::size_t n = 0; n < n_len; ++n) {
    const double phase = 2.0 * kPi * static_cast<double>(n) * params.m / n_d + params.p;
    cplx v = std::polar(params.a, phase);
    if (!noise.empty()) v += noise[n];
    y[n] = window[n] * v;
  }
  std::vector<double> out;
  out.reserve(2 * options.bins);
  for (std::size_t k = 0; k < options.bins; ++k) {
    cplx acc{};
    for (std::size_t n = 0; n < n_len; ++n) {
      // Reduce k*n mod N before forming the angle to keep the twiddle exact.
      const double angle = -2.0 * kPi * static_cast<double>((k * n) % n_len) / n_d;
      acc += y[n] * cplx(std::cos(angle), std::sin(angle));
    }
    out.push_back(acc.real());
    out.push_back(acc.imag());
  }
  return out;
}

std::array<double, 3> sinusoid_targets(const SinusoidParams& params) {
  return {params.m, params.a * std::sin(params.p), params.a * std::cos(params.p)};
}

SinusoidDataset generate_sinusoid_dataset(std::size_t count, std::uint64_t seed,
                                          const SinusoidOptions& options) {
  if (count == 0) throw ArgumentError("sinusoid dataset needs at least one sample");
  const std::size_t width = 2 * options.bins;
  std::vector<double> x(count * width), t(count * 3);
  SinusoidDataset ds;
  ds.params.resize(count);

  // Twiddles shared by all samples.
  const std::size_t n_len = options.length;
  const auto window = hann_window(n_len);
  std::vector<cplx> twiddle(n_len);
  for (std::size_t r = 0; r < n_len; ++r) {
    twiddle[r] = std::polar(1.0, -2.0 * kPi * static_cast<double>(r) / static_cast<double>(n_len));
  }
  std::vector<cplx> y(n_len);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, {i}));
    std::uniform_real_distribution<double> ua(0.1, 1.0), um(5.0, 12.0), up(-kPi, kPi),
        ur(0.0, options.noise_max);
    SinusoidParams p{ua(rng), um(rng), up(rng)};
    ds.params[i] = p;
    for (std::size_t n = 0; n < n_len; ++n) {
      const double phase =
          2.0 * kPi * static_cast<double>(n) * p.m / static_cast<double>(n_len) + p.p;
      const double r = ur(rng);
      const double phi = up(rng);
      y[n] = window[n] * (std::polar(p.a, phase) + std::polar(r, phi));
    }
    for (std::size_t k = 0; k < options.bins; ++k) {
      cplx acc{};
      for (std::size_t n = 0; n < n_len; ++n) acc += y[n] * twiddle[(k * n) % n_len];
      x[i * width + 2 * k] = acc.real();
      x[i * width + 2 * k + 1] = acc.imag();
    }
    const auto tg = sinusoid_targets(p);
    std::copy(tg.begin(), tg.end(), t.begin() + static_cast<std::ptrdiff_t>(i * 3));
  }
  ds.predictors = Tensor::real({count, width}, std::move(x));
  ds.targets = Tensor::real({count, 3}, std::move(t));
  return ds;
}

Split stratified_split(std::span<const int> labels, std::uint64_t seed, double val_fraction,
                       double test_fraction) {
  if (val_fraction < 0 || test_fraction < 0 || val_fraction + test_fraction >= 1.0) {
    throw ConfigError("split fractions must be nonnegative and sum below 1");
  }
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);
  Split split;
  split.seed = seed;
  for (auto& [label, idx] : by_label) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(static_cast<std::int64_t>(label))}));
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n = static_cast<double>(idx.size());
    const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * n));
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * n));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (j < n_val) {
        split.val.push_back(idx[j]);
      } else if (j < n_val + n_test) {
        split.test.push_back(idx[j]);
      } else {
        split.train.push_back(idx[j]);
      }
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

nlohmann::json split_to_json(const Split& split) {
  return {{"seed", split.seed}, {"train", split.train}, {"val", split.val}, {"test", split.test}};
}

Split split_from_json(const nlohmann::json& j) {
  try {
    Split s;
    s.seed = j.value("seed", std::uint64_t{0});
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.val = j.at("val").get<std::vector<std::size_t>>();
    s.test = j.at("test").get<std::vector<std::size_t>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed split file: ") + e.what());
  }
}

void save_split(const Split& split, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write split file " + path.string());
  out << split_to_json(split).dump(1) << '\n';
}

Split load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read split file " + path.string());
  try {
    return split_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("split file " + path.string() + " is not valid JSON: " + e.what());
  }
}

InMemorySource make_toy_source(const ToyOptions& o) {
  if (o.classes < 2 || o.count == 0 || o.channels == 0 || o.length == 0) {
    throw ConfigError("toy dataset needs >= 2 classes and nonzero sizes");
  }
  const std::size_t n = o.channels * o.length;
  Rng trng(derive_seed(o.seed, {0xC1A55}));
  std::uniform_real_distribution<double> uphase(-std::numbers::pi, std::numbers::pi);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<double>> real_tpl(o.classes, std::vector<double>(n));
  std::vector<std::vector<cplx>> cplx_tpl(o.classes, std::vector<cplx>(n));
  for (std::size_t c = 0; c < o.classes; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      real_tpl[c][i] = coin(trng) ? 1.0 : -1.0;
      cplx_tpl[c][i] = std::polar(1.0, uphase(trng));
    }
  }
  std::vector<Example> examples;
  examples.reserve(o.count);
  for (std::size_t e = 0; e < o.count; ++e) {
    Rng rng(derive_seed(o.seed, {e}));
    std::normal_distribution<double> g(0.0, o.noise);
    Example ex;
    ex.label = static_cast<int>(e % o.classes);
    const auto c = static_cast<std::size_t>(ex.label);
    if (has_real(o.domain)) {
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = real_tpl[c][i] + g(rng);
      ex.real = Tensor::real({o.channels, o.length}, std::move(d));
    }
    if (has_complex(o.domain)) {
      std::vector<cplx> d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = cplx_tpl[c][i] + cplx(g(rng), g(rng));
      ex.complex = Tensor::complex({o.channels, o.length}, std::move(d));
    }
    examples.push_back(std::move(ex));
  }
  return InMemorySource(std::move(examples));
}

std::vector<int> labels_of(const ExampleSource& source) {
  std::vector<int> out(source.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = source.label(i);
  return out;
}

}  // namespace hnn
