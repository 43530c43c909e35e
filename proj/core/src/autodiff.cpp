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

#include "hybridnn/autodiff.hpp"

#include <atomic>
#include <cmath>
#include <unordered_set>

#include "hybridnn/errors.hpp"

namespace hnn {
namespace {

std::atomic<ParamId> next_param_id{1};

void accumulate_into(detail::Node& node, const Tensor& grad) {
  if (!node.value.same_layout(grad)) {
    throw ShapeError("gradient layout " + shape_to_string(grad.shape()) + "/" +
                     to_string(grad.dtype()) + " does not match value " +
                     shape_to_string(node.value.shape()) + "/" +
                     to_string(node.value.dtype()));
  }
  if (!node.has_grad) {
    node.grad = grad;
    node.has_grad = true;
    return;
  }
  if (grad.is_complex()) {
    auto dst = node.grad.complex_data();
    auto src = grad.complex_data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  } else {
    auto dst = node.grad.real_data();
    auto src = grad.real_data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

}  // namespace

bool GradAccumulator::wants(std::size_t i) const {
  return i < inputs_.size() && inputs_[i].requires_grad();
}

void GradAccumulator::add(std::size_t i, const Tensor& grad) {
  if (!wants(i)) return;
  accumulate_into(*inputs_[i].node(), grad);
}

void GradAccumulator::add(std::size_t i, Tensor&& grad) {
  if (!wants(i)) return;
  auto& node = *inputs_[i].node();
  if (!node.has_grad && node.value.same_layout(grad)) {
    node.grad = std::move(grad);
    node.has_grad = true;
    return;
  }
  accumulate_into(node, grad);
}

Var::Var(Tensor value) : node_(std::make_shared<detail::Node>()) {
  node_->value = std::move(value);
}

Var Var::parameter(Tensor value, std::string name) {
  Var v(std::move(value));
  v.node_->requires_grad = true;
  v.node_->param = next_param_id.fetch_add(1);
  v.node_->name = std::move(name);
  return v;
}

Var Var::from_op(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Var v(std::move(value));
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (any) {
    v.node_->requires_grad = true;
    v.node_->inputs = std::move(inputs);
    v.node_->backward = std::move(backward);
  }
  return v;
}

const Tensor& Var::value() const {
  if (!node_) throw ArgumentError("use of an undefined Var");
  return node_->value;
}

Tensor& Var::mutable_value() {
  if (!node_) throw ArgumentError("use of an undefined Var");
  return node_->value;
}

bool Var::requires_grad() const { return node_ && node_->requires_grad; }

std::optional<ParamId> Var::param_id() const {
  return node_ ? node_->param : std::nullopt;
}

const std::string& Var::name() const {
  static const std::string empty;
  return node_ ? node_->name : empty;
}

void Var::set_name(std::string name) {
  if (node_) node_->name = std::move(name);
}

GradientMap backward(const Var& loss, std::span<const Var> params) {
  if (!loss.defined()) throw ArgumentError("backward on an undefined loss");
  if (loss.value().numel() != 1) {
    throw ShapeError("loss must be a scalar, got shape " +
                     shape_to_string(loss.shape()));
  }
  if (loss.is_complex()) throw ShapeError("loss must be real-valued");

  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<detail::Node*> order;
  if (loss.requires_grad()) {
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(loss.node(), 0);
    visited.insert(loss.node());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->inputs.size()) {
        detail::Node* child = node->inputs[next++].node();
        if (child->requires_grad && visited.insert(child).second) {
          stack.emplace_back(child, 0);
        }
        continue;
      }
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto* node : order) {
    node->has_grad = false;
    node->grad = Tensor();
  }
  if (!order.empty()) {
    loss.node()->grad = Tensor::full(loss.shape(), 1.0);
    loss.node()->has_grad = true;
  }

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (!node->has_grad || !node->backward) continue;
    GradAccumulator acc(node->inputs);
    node->backward(node->grad, acc);
  }

  GradientMap out;
  for (auto* node : order) {
    if (!node->param) continue;
    Tensor g = node->has_grad ? std::move(node->grad)
                              : Tensor::zeros(node->value.shape(), node->value.dtype());
    out[*node->param] = Gradient{*node->param, std::move(g)};
  }
  for (auto* node : order) {
    node->has_grad = false;
    node->grad = Tensor();
  }
  for (const auto& p : params) {
    const auto id = p.param_id();
    if (!id || out.contains(*id)) continue;
    out[*id] = Gradient{*id, Tensor::zeros(p.shape(), p.dtype())};
  }
  return out;
}

GradientMap finite_difference_gradient(const std::function<double()>& f,
                                       std::span<const Var> params, double step) {
  if (!(step > 0.0)) throw ArgumentError("finite-difference step must be positive");
  auto eval = [&f] {
    const double v = f();
    if (!std::isfinite(v)) throw NumericError("objective returned a non-finite value");
    return v;
  };

  GradientMap out;
  for (const auto& p : params) {
    const auto id = p.param_id();
    if (!id) throw ArgumentError("finite_difference_gradient needs parameters");
    Var handle = p;
    Tensor& value = handle.mutable_value();
    Tensor grad = Tensor::zeros(value.shape(), value.dtype());
    if (value.is_complex()) {
      auto data = value.complex_data();
      auto g = grad.complex_data();
      for (std::size_t i = 0; i < data.size(); ++i) {
        const cplx original = data[i];
        data[i] = original + cplx(step, 0);
        const double re_plus = eval();
        data[i] = original - cplx(step, 0);
        const double re_minus = eval();
        data[i] = original + cplx(0, step);
        const double im_plus = eval();
        data[i] = original - cplx(0, step);
        const double im_minus = eval();
        data[i] = original;
        g[i] = {(re_plus - re_minus) / (2 * step), (im_plus - im_minus) / (2 * step)};
      }
    } else {
      auto data = value.real_data();
      auto g = grad.real_data();
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double original = data[i];
        data[i] = original + step;
        const double plus = eval();
        data[i] = original - step;
        const double minus = eval();
        data[i] = original;
        g[i] = (plus - minus) / (2 * step);
      }
    }
    out[*id] = Gradient{*id, std::move(grad)};
  }
  return out;
}

}  // namespace hnn
