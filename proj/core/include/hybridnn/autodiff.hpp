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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hybridnn/tensor.hpp"

namespace hnn {

using ParamId = std::uint64_t;

// Gradient convention
// -------------------
// For a real scalar loss L and a complex parameter w = a + ib, the stored
// gradient is dL/da + i dL/db (equal to 2 dL/d conj(w)). Real parameters store
// dL/dw. Optimizers subtract lr * gradient directly, so every complex
// parameter behaves exactly like two independent real parameters.
//
// Chain rule in this convention: if y = f(z) with Wirtinger derivatives
// A = df/dz and B = df/dconj(z), then G_z = conj(A) G_y + B conj(G_y).

class Var;

/// Gradient sink handed to an op's backward closure.
class GradAccumulator {
 public:
  explicit GradAccumulator(std::span<const Var> inputs) : inputs_(inputs) {}
  /// True when input `i` participates in differentiation.
  bool wants(std::size_t i) const;
  /// Adds `grad` (same shape and dtype as input `i`) into input `i`.
  void add(std::size_t i, const Tensor& grad);
  void add(std::size_t i, Tensor&& grad);

 private:
  std::span<const Var> inputs_;
};

using BackwardFn = std::function<void(const Tensor& grad_out, GradAccumulator& acc)>;

namespace detail {
struct Node {
  Tensor value;
  Tensor grad;
  bool has_grad = false;
  bool requires_grad = false;
  std::vector<Var> inputs;
  BackwardFn backward;
  std::optional<ParamId> param;
  std::string name;
};
}  // namespace detail

/// Handle to a value in a define-by-run computation graph.
///
/// Copies share the underlying node. Constants do not track gradients;
/// parameters are leaves with a stable id; op results record their inputs
/// and a backward closure when any input requires a gradient.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value);

  static Var parameter(Tensor value, std::string name = {});
  static Var from_op(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const;
  /// In-place access for optimizers and finite differences.
  Tensor& mutable_value();
  const Shape& shape() const { return value().shape(); }
  DType dtype() const { return value().dtype(); }
  bool is_complex() const { return value().is_complex(); }
  bool requires_grad() const;
  std::optional<ParamId> param_id() const;
  const std::string& name() const;
  void set_name(std::string name);
  Var detach() const { return Var(value()); }

  detail::Node* node() const { return node_.get(); }

 private:
  std::shared_ptr<detail::Node> node_;
};

struct Gradient {
  ParamId wrt = 0;
  Tensor value;
};

using GradientMap = std::map<ParamId, Gradient>;

/// Reverse-mode sweep from a real scalar `loss`. Every parameter reachable
/// from `loss` appears in the result; each entry of `params` that is not
/// reachable appears with an all-zero gradient.
GradientMap backward(const Var& loss, std::span<const Var> params = {});

/// Central differences on every real and imaginary component of `params`,
/// packed in the same convention as `backward`.
GradientMap finite_difference_gradient(const std::function<double()>& f,
                                       std::span<const Var> params, double step);

}  // namespace hnn
