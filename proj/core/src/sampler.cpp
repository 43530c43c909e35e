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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "hybridnn/nas.hpp"
#include "hybridnn/seed.hpp"

namespace hnn {

RandomSampler::RandomSampler(std::uint64_t seed) : seed_(seed), rng_(seed) {}

void RandomSampler::begin_trial(std::span<const Trial>, Phase phase, std::size_t index) {
  rng_.seed(derive_seed(seed_, {static_cast<std::uint64_t>(phase), index}));
}

std::size_t RandomSampler::categorical(const std::string& name, std::size_t n) {
  if (n == 0) throw ArgumentError("decision '" + name + "' has no options");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
}

double RandomSampler::uniform(const std::string& name, double lo, double hi) {
  if (!(lo <= hi)) throw ArgumentError("decision '" + name + "' has an empty range");
  return std::uniform_real_distribution<double>(lo, hi)(rng_);
}

double RandomSampler::log_uniform(const std::string& name, double lo, double hi) {
  if (!(lo > 0.0 && lo <= hi)) throw ArgumentError("decision '" + name + "' needs 0 < lo <= hi");
  return std::exp(uniform(name, std::log(lo), std::log(hi)));
}

MedianPruner::MedianPruner(std::size_t warmup_epochs, std::size_t min_trials)
    : warmup_(warmup_epochs), min_trials_(std::max<std::size_t>(1, min_trials)) {}

bool MedianPruner::should_prune(std::size_t epoch, double value,
                                std::span<const Trial> reference) const {
  if (epoch < warmup_) return false;
  std::vector<double> at;
  for (const auto& t : reference) {
    if (t.status == TrialStatus::Complete && t.curve.size() > epoch &&
        std::isfinite(t.curve[epoch])) {
      at.push_back(t.curve[epoch]);
    }
  }
  if (at.size() < min_trials_) return false;
  std::sort(at.begin(), at.end());
  const std::size_t n = at.size();
  const double median = n % 2 == 1 ? at[n / 2] : 0.5 * (at[n / 2 - 1] + at[n / 2]);
  return value > median;
}

TrialStore::TrialStore(std::filesystem::path path) : path_(std::move(path)) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw DataError("cannot open trial store " + path_.string());
}

void TrialStore::append(const Trial& trial) {
  const std::string line = trial_to_json(trial).dump() + "\n";
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw DataError("cannot append to trial store " + path_.string());
  out << line;
  out.flush();
}

std::vector<Trial> TrialStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read trial store " + path.string());
  std::vector<Trial> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(trial_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace hnn
