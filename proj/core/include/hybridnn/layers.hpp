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

#include <cstddef>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hybridnn/autodiff.hpp"
#include "hybridnn/ops.hpp"

namespace hnn {

using Rng = std::mt19937_64;

enum class Domain { Real, Complex };

DType to_dtype(Domain domain);
std::string to_string(Domain domain);
Domain domain_from_string(const std::string& name);

/// Parameter total under the counting rule: a complex weight or bias counts
/// as two parameters, a real one as one.
struct ParamCount {
  std::size_t total = 0;
  ParamCount& operator+=(ParamCount other) {
    total += other.total;
    return *this;
  }
  friend ParamCount operator+(ParamCount a, ParamCount b) { return a += b; }
  friend bool operator==(ParamCount, ParamCount) = default;
};

ParamCount count_parameters(const Tensor& tensor);
ParamCount count_parameters(std::span<const Var> params);

struct ConvConfig {
  Domain domain = Domain::Real;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t groups = 1;
  bool bias = true;
};

/// 1-D convolution over [batch, channels, length] with "same" padding.
/// A complex layer realizes o = w * x with true complex multiplies.
class ConvLayer {
 public:
  ConvLayer(const ConvConfig& config, Rng& rng);
  ConvLayer(const ConvConfig& config, Tensor weight, Tensor bias);

  Var forward(const Var& input) const;
  std::vector<Var> parameters() const;
  ParamCount count_parameters() const;
  const ConvConfig& config() const { return config_; }

  Var weight;
  Var bias;

 private:
  void validate() const;
  ConvConfig config_;
};

struct LinearConfig {
  Domain domain = Domain::Real;
  std::size_t in_features = 1;
  std::size_t out_features = 1;
  bool bias = true;
};

/// Fully connected layer: [N, in] -> [N, out], weight stored [out, in].
class LinearLayer {
 public:
  LinearLayer(const LinearConfig& config, Rng& rng);
  LinearLayer(const LinearConfig& config, Tensor weight, Tensor bias);

  Var forward(const Var& input) const;
  std::vector<Var> parameters() const;
  ParamCount count_parameters() const;
  const LinearConfig& config() const { return config_; }

  Var weight;
  Var bias;

 private:
  LinearConfig config_;
};

/// Batch amplitude mean normalisation: divides each channel by the mean
/// element magnitude over batch and length (plus eps). Phase is untouched.
/// Works on real tensors as well, where it rescales by mean |x|.
class Bamn {
 public:
  explicit Bamn(std::size_t channels, double eps = 1e-5, double momentum = 0.1);

  /// Input [batch, channels, ...]. Training mode uses batch statistics and
  /// updates the running mean; eval mode uses the frozen running mean.
  Var forward(const Var& input, bool training);

  const Tensor& running_mean() const { return running_mean_; }
  void set_running_mean(Tensor mean);
  std::size_t channels() const { return channels_; }

 private:
  std::size_t channels_;
  double eps_;
  double momentum_;
  Tensor running_mean_;
};

/// Inverted dropout. Complex elements are dropped as whole units.
Var dropout(const Var& input, double p, Rng& rng, bool training);

enum class OptimizerKind { Sgd, Adam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);

/// Updates parameters in place from a gradient map. Complex parameters are
/// handled as pairs of independent reals.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(std::span<Var> params, const GradientMap& grads) = 0;
  double learning_rate() const { return lr_; }

 protected:
  explicit Optimizer(double lr);
  double lr_;
};

class Sgd : public Optimizer {
 public:
  explicit Sgd(double lr, double momentum = 0.9);
  void step(std::span<Var> params, const GradientMap& grads) override;

 private:
  double momentum_;
  std::map<ParamId, std::vector<double>> velocity_;
};

class Adam : public Optimizer {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::span<Var> params, const GradientMap& grads) override;

 private:
  double beta1_, beta2_, eps_;
  std::size_t steps_ = 0;
  std::map<ParamId, std::vector<double>> m_, v_;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double lr);

/// Plain stack of fully connected layers with one real activation after
/// every layer but the last.
class Mlp {
 public:
  Mlp(Domain domain, std::size_t inputs, const std::vector<std::size_t>& widths,
      std::string activation, Rng& rng);
  Mlp(std::vector<LinearLayer> layers, std::string activation);

  Var forward(const Var& input) const;
  /// Outputs of every layer after its activation (the last one is raw).
  std::vector<Var> forward_trace(const Var& input) const;
  std::vector<Var> parameters() const;
  ParamCount count_parameters() const;

  const std::vector<LinearLayer>& layers() const { return layers_; }
  const std::string& activation() const { return activation_; }

 private:
  std::vector<LinearLayer> layers_;
  std::string activation_;
};

/// Checkpoint helpers: {"layers":[{"weight":<tensor>,"bias":<tensor>}...],
/// "activation": name, "kind": "mlp"}.
nlohmann::json mlp_to_json(const Mlp& mlp);
Mlp mlp_from_json(const nlohmann::json& j);

}  // namespace hnn
