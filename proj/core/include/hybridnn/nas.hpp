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
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridnn/errors.hpp"
#include "hybridnn/hybrid_graph.hpp"
#include "hybridnn/training.hpp"

namespace hnn {

enum class Phase {
  Customisation,
  BlockNumber,
  InputSelection,
  DependencyCheck,
  StructureRefinement,
  ActivationDCChoice,
  HyperparameterChoice,
  Done,
};

std::string to_string(Phase phase);
Phase phase_from_string(const std::string& name);

enum class TrialStatus { Complete, Pruned, Failed };
std::string to_string(TrialStatus status);
TrialStatus trial_status_from_string(const std::string& name);

struct Trial {
  std::size_t trial_id = 0;
  Phase phase = Phase::Customisation;
  NetworkSpec architecture;
  Hyperparams hyperparams;
  /// Finite for complete trials; NaN otherwise.
  double validation_loss = std::numeric_limits<double>::quiet_NaN();
  std::size_t param_count = 0;
  TrialStatus status = TrialStatus::Complete;
  double wall_time = 0.0;
  std::string note;
  std::vector<double> curve;
};

nlohmann::json trial_to_json(const Trial& trial, bool include_wall_time = true);
Trial trial_from_json(const nlohmann::json& j);

struct Constraints {
  std::size_t min_params = 0;
  std::size_t max_params = std::numeric_limits<std::size_t>::max();
  bool satisfied(std::size_t count) const { return count >= min_params && count <= max_params; }
  /// Distance of `count` from the feasible interval.
  std::size_t violation(std::size_t count) const;
};

/// Candidate lists for the sampled phases.
struct SearchSpace {
  std::size_t min_blocks = 2;
  std::size_t max_blocks = 7;
  std::vector<std::size_t> channels = {4, 8, 16, 32};
  std::vector<std::size_t> kernels = {1, 3, 5};
  /// Kernel candidates for the first block; empty means `kernels`.
  std::vector<std::size_t> first_kernels;
  std::vector<std::size_t> pools = {1, 2};
  std::vector<double> dropouts = {0.0, 0.1, 0.2};
  std::vector<std::string> real_activations = {"ReLU", "Softplus", "Tanh", "Abs", "Tanhshrink"};
  std::vector<std::string> complex_activations = {"cRecip", "cReLU",     "cAbs",    "cTanhshrink",
                                                  "cTanh",  "cSoftPlus", "cReImLU", "cRecipMax"};
  std::vector<ConversionKind> r2c_kinds = {ConversionKind::Real,   ConversionKind::Exp,
                                           ConversionKind::Sqrt,   ConversionKind::MagExp,
                                           ConversionKind::Cartesian, ConversionKind::Polar,
                                           ConversionKind::Rotation};
  std::vector<ConversionKind> c2r_kinds = {
      ConversionKind::Real,        ConversionKind::Mag,       ConversionKind::SquareMag,
      ConversionKind::AbsPhase,    ConversionKind::MagAbsPhase, ConversionKind::Cartesian,
      ConversionKind::Polar,       ConversionKind::MultiMagReal, ConversionKind::MultiMagPhase};
  double lr_min = 1e-4;
  double lr_max = 1e-2;
  std::vector<OptimizerKind> optimizers = {OptimizerKind::Adam, OptimizerKind::Sgd};
};

struct SearchConfig {
  std::size_t trials_per_phase = 8;
  Constraints constraints;
  std::uint64_t seed = 0;
  /// Learning rate used until the hyperparameter phase.
  double preliminary_lr = 1e-3;
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::Adam;
  SearchSpace space;
  PrototypeOptions prototype;
  AdaptOptions adapt;
  std::size_t selection_cap = 5;
  bool use_pruner = true;
  /// Epochs before the median rule applies.
  std::size_t pruner_warmup_epochs = 1;
  /// Completed reference trials needed before anything is pruned.
  std::size_t pruner_min_trials = 5;
  std::size_t threads = 1;
  std::optional<std::filesystem::path> trial_store;
};

nlohmann::json search_config_to_json(const SearchConfig& config);
SearchConfig search_config_from_json(const nlohmann::json& j, SearchConfig defaults = {});

/// Shape of the task seen by the search.
struct TaskSpec {
  IoDomain input = IoDomain::Complex;
  IoDomain output = IoDomain::Real;
  std::size_t real_channels = 0;
  std::size_t complex_channels = 0;
  std::size_t classes = 10;
};

struct EvalResult {
  double validation_loss = 0.0;
  std::vector<double> curve;
  bool stopped_early = false;
};

/// Trains or scores one candidate. Implementations must be safe to call
/// from several threads at once.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvalResult evaluate(const NetworkSpec& spec, const Hyperparams& hp,
                              const EpochCallback& on_epoch) const = 0;
};

/// Trains a freshly initialised network on the task's train split and
/// reports the final validation loss.
class TrainingEvaluator : public Evaluator {
 public:
  explicit TrainingEvaluator(TaskData data);
  EvalResult evaluate(const NetworkSpec& spec, const Hyperparams& hp,
                      const EpochCallback& on_epoch) const override;

 private:
  TaskData data_;
};

/// Wraps a callable; handy for surrogate objectives.
class FunctionEvaluator : public Evaluator {
 public:
  using Fn = std::function<EvalResult(const NetworkSpec&, const Hyperparams&, const EpochCallback&)>;
  explicit FunctionEvaluator(Fn fn) : fn_(std::move(fn)) {}
  EvalResult evaluate(const NetworkSpec& spec, const Hyperparams& hp,
                      const EpochCallback& on_epoch) const override {
    return fn_(spec, hp, on_epoch);
  }

 private:
  Fn fn_;
};

/// Source of decisions for proposals. `begin_trial` is called before each
/// proposal with the history so far.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual void begin_trial(std::span<const Trial> history, Phase phase, std::size_t index) = 0;
  /// Index in [0, n).
  virtual std::size_t categorical(const std::string& name, std::size_t n) = 0;
  virtual double uniform(const std::string& name, double lo, double hi) = 0;
  virtual double log_uniform(const std::string& name, double lo, double hi) = 0;
};

/// Uniform random decisions from a stream seeded by (seed, phase, index).
class RandomSampler : public Sampler {
 public:
  explicit RandomSampler(std::uint64_t seed);
  void begin_trial(std::span<const Trial> history, Phase phase, std::size_t index) override;
  std::size_t categorical(const std::string& name, std::size_t n) override;
  double uniform(const std::string& name, double lo, double hi) override;
  double log_uniform(const std::string& name, double lo, double hi) override;

 private:
  std::uint64_t seed_;
  Rng rng_;
};

/// Stops a trial whose validation loss at some epoch exceeds the median of
/// the reference trials' losses at the same epoch.
class MedianPruner {
 public:
  explicit MedianPruner(std::size_t warmup_epochs = 1, std::size_t min_trials = 1);
  bool should_prune(std::size_t epoch, double value, std::span<const Trial> reference) const;

 private:
  std::size_t warmup_;
  std::size_t min_trials_;
};

/// Append-only newline-delimited JSON trial log.
class TrialStore {
 public:
  explicit TrialStore(std::filesystem::path path);
  void append(const Trial& trial);
  static std::vector<Trial> load(const std::filesystem::path& path);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

struct SearchState {
  Phase phase = Phase::Customisation;
  NetworkSpec best_architecture;
  Hyperparams best_hyperparams;
  double best_validation_loss = std::numeric_limits<double>::quiet_NaN();
  std::size_t best_param_count = 0;
  std::vector<Trial> trials;
  std::uint64_t seed = 0;
  Constraints constraints;
  std::vector<Phase> phase_history;
  std::size_t selection_iterations = 0;
};

nlohmann::json search_state_to_json(const SearchState& state);

class InfeasibleSearchError : public Error {
 public:
  InfeasibleSearchError(const std::string& what, std::optional<Trial> best)
      : Error(what), best_infeasible(std::move(best)) {}
  std::optional<Trial> best_infeasible;
};

/// Runs the eight phases in order. Throws InfeasibleSearchError when no
/// candidate satisfies the parameter constraints.
SearchState run_search(const TaskSpec& task, const SearchConfig& config,
                       const Evaluator& evaluator, Sampler* sampler = nullptr);

/// Architecture with `blocks` prototype blocks adapted to the task.
NetworkSpec initial_architecture(const TaskSpec& task, const SearchConfig& config,
                                 std::size_t blocks);

}  // namespace hnn
