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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hybridnn/hybrid_graph.hpp"
#include "hybridnn/layers.hpp"

namespace hnn {

/// One classification example: real and/or complex features [channels, length].
struct Example {
  std::optional<Tensor> real;
  std::optional<Tensor> complex;
  int label = 0;
};

/// Random-access example provider. `access` distinguishes repeated reads of
/// the same index (epoch number during training, 0 for evaluation) so that
/// per-access augmentation stays a pure function of (seed, index, access).
class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual std::size_t size() const = 0;
  virtual int label(std::size_t index) const = 0;
  virtual Example get(std::size_t index, std::uint64_t access) const = 0;
};

/// Examples held in memory, returned unchanged for every access.
class InMemorySource : public ExampleSource {
 public:
  explicit InMemorySource(std::vector<Example> examples);
  std::size_t size() const override { return examples_.size(); }
  int label(std::size_t index) const override;
  Example get(std::size_t index, std::uint64_t access) const override;

 private:
  std::vector<Example> examples_;
};

/// Fixed split of one source.
struct TaskData {
  const ExampleSource* source = nullptr;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  std::size_t classes = 10;
};

struct Hyperparams {
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::uint64_t seed = 0;
};

nlohmann::json hyperparams_to_json(const Hyperparams& h);
Hyperparams hyperparams_from_json(const nlohmann::json& j, Hyperparams defaults = {});

struct TrainReport {
  /// Index 0 holds the losses before training, index e the losses after epoch e.
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  std::size_t parameters = 0;
  std::size_t epochs_run = 0;
  bool stopped_early = false;
};

nlohmann::json train_report_to_json(const TrainReport& report);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Stacks examples into a batch ([batch, channels, length]).
NetworkInput make_batch(const std::vector<Example>& examples);

/// Mean cross-entropy and accuracy over `indices` in eval mode.
Evaluation evaluate(Network& net, const ExampleSource& source, std::span<const std::size_t> indices,
                    std::size_t batch_size = 64, std::uint64_t access = 0);

/// Called after each epoch with (epoch, validation loss); returning false
/// stops training early.
using EpochCallback = std::function<bool(std::size_t, double)>;

/// Minibatch training with cross-entropy. Deterministic for a given
/// hyperparameter seed. Throws NumericError on a non-finite loss.
TrainReport train(Network& net, const TaskData& data, const Hyperparams& hp,
                  const EpochCallback& on_epoch = {});

/// Regression training of an MLP with mean squared error on dense data
/// (inputs [n, in], targets [n, out]). Returns the per-epoch mean loss,
/// index 0 being the initial loss.
std::vector<double> train_regression(Mlp& mlp, const Tensor& inputs, const Tensor& targets,
                                     const Hyperparams& hp);

/// Rows `rows` of a 2-D tensor.
Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows);

}  // namespace hnn
