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

#include "hybridnn/layers.hpp"

#include <cmath>

#include "hybridnn/activations.hpp"
#include "hybridnn/errors.hpp"

namespace hnn {
namespace {

Tensor init_uniform(const Shape& shape, Domain domain, double bound, Rng& rng) {
  Tensor t(shape, to_dtype(domain));
  if (domain == Domain::Real) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& x : t.real_data()) x = u(rng);
  } else {
    // Same expected |w|^2 as the real initialisation.
    const double b = bound / std::sqrt(2.0);
    std::uniform_real_distribution<double> u(-b, b);
    for (cplx& z : t.complex_data()) {
      const double re = u(rng);
      const double im = u(rng);
      z = {re, im};
    }
  }
  return t;
}

// View any parameter/gradient buffer as a flat array of reals.
std::span<double> flat_reals(Tensor& t) {
  if (!t.is_complex()) return t.real_data();
  auto c = t.complex_data();
  return {reinterpret_cast<double*>(c.data()), c.size() * 2};
}

std::span<const double> flat_reals(const Tensor& t) {
  if (!t.is_complex()) return t.real_data();
  auto c = t.complex_data();
  return {reinterpret_cast<const double*>(c.data()), c.size() * 2};
}

}  // namespace

DType to_dtype(Domain domain) {
  return domain == Domain::Real ? DType::Real64 : DType::Complex128;
}

std::string to_string(Domain domain) { return domain == Domain::Real ? "real" : "complex"; }

Domain domain_from_string(const std::string& name) {
  if (name == "real") return Domain::Real;
  if (name == "complex") return Domain::Complex;
  throw ConfigError("unknown domain '" + name + "'");
}

ParamCount count_parameters(const Tensor& tensor) {
  return {tensor.numel() * (tensor.is_complex() ? 2 : 1)};
}

ParamCount count_parameters(std::span<const Var> params) {
  ParamCount total;
  for (const auto& p : params) total += count_parameters(p.value());
  return total;
}

// ---------------------------------------------------------------------------

ConvLayer::ConvLayer(const ConvConfig& config, Rng& rng) : config_(config) {
  validate();
  const std::size_t fan_in = config.in_channels / config.groups * config.kernel;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  weight = Var::parameter(
      init_uniform({config.out_channels, config.in_channels / config.groups, config.kernel},
                   config.domain, bound, rng),
      "conv.weight");
  if (config.bias) {
    bias = Var::parameter(init_uniform({config.out_channels}, config.domain, bound, rng),
                          "conv.bias");
  }
}

ConvLayer::ConvLayer(const ConvConfig& config, Tensor w, Tensor b) : config_(config) {
  validate();
  const Shape expected{config.out_channels, config.in_channels / config.groups, config.kernel};
  if (w.shape() != expected || w.dtype() != to_dtype(config.domain)) {
    throw ShapeError("conv weight must be " + shape_to_string(expected) + " " +
                     to_string(to_dtype(config.domain)));
  }
  weight = Var::parameter(std::move(w), "conv.weight");
  if (config.bias) {
    if (b.shape() != Shape{config.out_channels} || b.dtype() != to_dtype(config.domain)) {
      throw ShapeError("conv bias must be [out_channels] of the layer domain");
    }
    bias = Var::parameter(std::move(b), "conv.bias");
  }
}

void ConvLayer::validate() const {
  if (config_.in_channels == 0 || config_.out_channels == 0 || config_.kernel == 0 ||
      config_.stride == 0 || config_.groups == 0) {
    throw ConfigError("conv layer extents must be positive");
  }
  if (config_.in_channels % config_.groups != 0 || config_.out_channels % config_.groups != 0) {
    throw ConfigError("conv channels (" + std::to_string(config_.in_channels) + " -> " +
                      std::to_string(config_.out_channels) + ") not divisible by groups " +
                      std::to_string(config_.groups));
  }
}

Var ConvLayer::forward(const Var& input) const {
  if (input.dtype() != to_dtype(config_.domain)) {
    throw ShapeError("conv layer of domain " + to_string(config_.domain) + " got a " +
                     to_string(input.dtype()) + " input");
  }
  return conv1d(input, weight, bias, {config_.stride, config_.groups});
}

std::vector<Var> ConvLayer::parameters() const {
  std::vector<Var> out{weight};
  if (bias.defined()) out.push_back(bias);
  return out;
}

ParamCount ConvLayer::count_parameters() const {
  return hnn::count_parameters(parameters());
}

// ---------------------------------------------------------------------------

LinearLayer::LinearLayer(const LinearConfig& config, Rng& rng) : config_(config) {
  if (config.in_features == 0 || config.out_features == 0) {
    throw ConfigError("linear layer extents must be positive");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.in_features));
  weight = Var::parameter(
      init_uniform({config.out_features, config.in_features}, config.domain, bound, rng),
      "linear.weight");
  if (config.bias) {
    bias = Var::parameter(init_uniform({config.out_features}, config.domain, bound, rng),
                          "linear.bias");
  }
}

LinearLayer::LinearLayer(const LinearConfig& config, Tensor w, Tensor b) : config_(config) {
  if (w.shape() != Shape{config.out_features, config.in_features} ||
      w.dtype() != to_dtype(config.domain)) {
    throw ShapeError("linear weight must be [out, in] of the layer domain");
  }
  weight = Var::parameter(std::move(w), "linear.weight");
  if (config.bias) {
    if (b.shape() != Shape{config.out_features} || b.dtype() != to_dtype(config.domain)) {
      throw ShapeError("linear bias must be [out] of the layer domain");
    }
    bias = Var::parameter(std::move(b), "linear.bias");
  }
}

Var LinearLayer::forward(const Var& input) const {
  if (input.dtype() != to_dtype(config_.domain)) {
    throw ShapeError("linear layer of domain " + to_string(config_.domain) + " got a " +
                     to_string(input.dtype()) + " input");
  }
  return linear(input, weight, bias);
}

std::vector<Var> LinearLayer::parameters() const {
  std::vector<Var> out{weight};
  if (bias.defined()) out.push_back(bias);
  return out;
}

ParamCount LinearLayer::count_parameters() const {
  return hnn::count_parameters(parameters());
}

// ---------------------------------------------------------------------------

Bamn::Bamn(std::size_t channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum),
      running_mean_(Tensor::full({channels}, 1.0)) {
  if (channels == 0) throw ConfigError("BAMN needs at least one channel");
  if (!(eps > 0)) throw ConfigError("BAMN eps must be positive");
}

void Bamn::set_running_mean(Tensor mean) {
  if (mean.shape() != Shape{channels_} || mean.is_complex()) {
    throw ShapeError("BAMN running mean must be a real [channels] tensor");
  }
  running_mean_ = std::move(mean);
}

Var Bamn::forward(const Var& input, bool training) {
  const Shape& shape = input.shape();
  if (shape.size() < 2) throw ShapeError("BAMN expects [batch, channels, ...]");
  if (shape[0] == 0) throw ShapeError("BAMN on an empty batch");
  if (shape[1] != channels_) {
    throw ShapeError("BAMN configured for " + std::to_string(channels_) + " channels, got " +
                     std::to_string(shape[1]));
  }
  Shape stat_shape(shape.size(), 1);
  stat_shape[1] = channels_;

  Var denom;
  if (training) {
    std::vector<std::size_t> axes;
    for (std::size_t d = 0; d < shape.size(); ++d) {
      if (d != 1) axes.push_back(d);
    }
    Var batch_mean = mean_axes(abs(input), axes);
    const auto bm = batch_mean.value().real_data();
    auto rm = running_mean_.real_data();
    for (std::size_t c = 0; c < channels_; ++c) {
      rm[c] = (1.0 - momentum_) * rm[c] + momentum_ * bm[c];
    }
    denom = add_scalar(batch_mean, eps_);
  } else {
    denom = Var(running_mean_.reshaped(stat_shape));
    denom = add_scalar(denom, eps_);
  }
  if (input.is_complex()) denom = to_complex(denom);
  return div(input, denom);
}

Var dropout(const Var& input, double p, Rng& rng, bool training) {
  if (!(p >= 0.0 && p < 1.0)) throw ArgumentError("dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return input;
  std::bernoulli_distribution keep(1.0 - p);
  const double scale_kept = 1.0 / (1.0 - p);
  const std::size_t n = input.value().numel();
  if (input.is_complex()) {
    Tensor mask(input.shape(), DType::Complex128);
    for (cplx& m : mask.complex_data()) m = keep(rng) ? scale_kept : 0.0;
    return mul(input, Var(std::move(mask)));
  }
  Tensor mask(input.shape(), DType::Real64);
  auto mv = mask.real_data();
  for (std::size_t i = 0; i < n; ++i) mv[i] = keep(rng) ? scale_kept : 0.0;
  return mul(input, Var(std::move(mask)));
}

// ---------------------------------------------------------------------------

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw ConfigError("unknown optimizer '" + name + "'");
}

Optimizer::Optimizer(double lr) : lr_(lr) {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
}

Sgd::Sgd(double lr, double momentum) : Optimizer(lr), momentum_(momentum) {}

void Sgd::step(std::span<Var> params, const GradientMap& grads) {
  for (auto& p : params) {
    const auto id = p.param_id();
    if (!id) continue;
    auto it = grads.find(*id);
    if (it == grads.end()) continue;
    auto w = flat_reals(p.mutable_value());
    auto g = flat_reals(it->second.value);
    auto& vel = velocity_[*id];
    if (vel.size() != w.size()) vel.assign(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      vel[i] = momentum_ * vel[i] + g[i];
      w[i] -= lr_ * vel[i];
    }
  }
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : Optimizer(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(std::span<Var> params, const GradientMap& grads) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (auto& p : params) {
    const auto id = p.param_id();
    if (!id) continue;
    auto it = grads.find(*id);
    if (it == grads.end()) continue;
    auto w = flat_reals(p.mutable_value());
    auto g = flat_reals(it->second.value);
    auto& m = m_[*id];
    auto& v = v_[*id];
    if (m.size() != w.size()) {
      m.assign(w.size(), 0.0);
      v.assign(w.size(), 0.0);
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double lr) {
  if (kind == OptimizerKind::Sgd) return std::make_unique<Sgd>(lr);
  return std::make_unique<Adam>(lr);
}

// ---------------------------------------------------------------------------

Mlp::Mlp(Domain domain, std::size_t inputs, const std::vector<std::size_t>& widths,
         std::string activation, Rng& rng)
    : activation_(std::move(activation)) {
  std::size_t in = inputs;
  for (std::size_t w : widths) {
    layers_.emplace_back(LinearConfig{domain, in, w, true}, rng);
    in = w;
  }
}

Mlp::Mlp(std::vector<LinearLayer> layers, std::string activation)
    : layers_(std::move(layers)), activation_(std::move(activation)) {}

std::vector<Var> Mlp::forward_trace(const Var& input) const {
  std::vector<Var> trace;
  Var h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward(h);
    if (i + 1 < layers_.size()) h = activate_real(activation_, h);
    trace.push_back(h);
  }
  return trace;
}

Var Mlp::forward(const Var& input) const {
  auto trace = forward_trace(input);
  return trace.empty() ? input : trace.back();
}

std::vector<Var> Mlp::parameters() const {
  std::vector<Var> out;
  for (const auto& l : layers_) {
    auto p = l.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

ParamCount Mlp::count_parameters() const { return hnn::count_parameters(parameters()); }

nlohmann::json mlp_to_json(const Mlp& mlp) {
  nlohmann::json j;
  j["kind"] = "mlp";
  j["activation"] = mlp.activation();
  auto layers = nlohmann::json::array();
  for (const auto& l : mlp.layers()) {
    nlohmann::json lj;
    lj["domain"] = to_string(l.config().domain);
    lj["in"] = l.config().in_features;
    lj["out"] = l.config().out_features;
    lj["weight"] = tensor_to_json(l.weight.value());
    if (l.bias.defined()) lj["bias"] = tensor_to_json(l.bias.value());
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "mlp") throw ConfigError("checkpoint is not an mlp");
    std::vector<LinearLayer> layers;
    for (const auto& lj : j.at("layers")) {
      LinearConfig cfg{domain_from_string(lj.at("domain").get<std::string>()),
                       lj.at("in").get<std::size_t>(), lj.at("out").get<std::size_t>(),
                       lj.contains("bias")};
      layers.emplace_back(cfg, tensor_from_json(lj.at("weight")),
                          cfg.bias ? tensor_from_json(lj.at("bias")) : Tensor());
    }
    return Mlp(std::move(layers), j.at("activation").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed mlp checkpoint: ") + e.what());
  }
}

}  // namespace hnn
