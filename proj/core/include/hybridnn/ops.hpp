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
#include <span>
#include <vector>

#include "hybridnn/autodiff.hpp"

namespace hnn {

// Differentiable operations. Binary elementwise ops broadcast with trailing
// alignment and require both operands to share a dtype; promote real operands
// with `to_complex` first.

enum class ElementwiseOp {
  Add, Sub, Mul, Div, Neg, Conj, Abs, Arg, Exp, Sqrt, Real, Imag, Max, Sign
};

/// Dispatches to the individual op below; `b` is required for binary kinds.
Var elementwise(ElementwiseOp kind, const Var& a, const Var& b = {});

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
/// Throws ArgumentError when any divisor element is exactly zero.
Var div(const Var& a, const Var& b);
/// a / (b + eps), never raises on zero divisors.
Var div_guarded(const Var& a, const Var& b, double eps);
/// Elementwise maximum of two real tensors; ties route the gradient to `a`.
Var maximum(const Var& a, const Var& b);

Var neg(const Var& a);
Var conj(const Var& a);
/// |z| as a real tensor; the gradient at 0 is 0.
Var abs(const Var& a);
/// Principal argument in (-pi, pi]; arg(0) = 0 with zero gradient.
Var arg(const Var& a);
Var exp(const Var& a);
/// Principal square root. Real inputs must be nonnegative.
Var sqrt(const Var& a);
Var real(const Var& a);
Var imag(const Var& a);
/// Real sign with sign(0) = 0; gradient is zero everywhere.
Var sign(const Var& a);
Var log(const Var& a);
Var tanh(const Var& a);
Var softplus(const Var& a);
Var elu(const Var& a);
Var relu(const Var& a);

Var scale(const Var& a, cplx factor);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, cplx offset);
Var add_scalar(const Var& a, double offset);
/// Integer power by repeated multiplication, n >= 0.
Var powi(const Var& a, int n);

Var to_complex(const Var& a);
Var make_complex(const Var& re, const Var& im);

Var sum(const Var& a);
Var mean(const Var& a);
/// Sums over `axes`, keeping them as extent-1 dimensions.
Var sum_axes(const Var& a, const std::vector<std::size_t>& axes);
Var mean_axes(const Var& a, const std::vector<std::size_t>& axes);

Var reshape(const Var& a, Shape shape);
Var concat(std::span<const Var> parts, std::size_t axis);
/// Slice along `axis` of `length` entries starting at `start`.
Var slice(const Var& a, std::size_t axis, std::size_t start, std::size_t length);
/// Picks `index` along `axis` and drops that axis.
Var select(const Var& a, std::size_t axis, std::size_t index);
/// Inverse of `select`: inserts a new axis at `axis`.
Var stack(std::span<const Var> parts, std::size_t axis);

/// [n, k] x [k, m] -> [n, m].
Var matmul(const Var& a, const Var& b);
/// x [N, in], weight [out, in], optional bias [out] -> [N, out].
Var linear(const Var& x, const Var& weight, const Var& bias = {});

struct Conv1dOptions {
  std::size_t stride = 1;
  std::size_t groups = 1;
};

/// x [B, Cin, L], weight [Cout, Cin/groups, K], optional bias [Cout].
/// "Same" padding: output length is ceil(L / stride).
Var conv1d(const Var& x, const Var& weight, const Var& bias, Conv1dOptions options = {});
std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride);

/// Average pooling along the last axis with window == stride == kernel.
Var avg_pool1d(const Var& x, std::size_t kernel);

/// Mean softmax cross-entropy; logits [B, K] real, labels in [0, K).
Var cross_entropy(const Var& logits, std::span<const int> labels);
/// Row-wise log-softmax of a real [B, K] tensor.
Var log_softmax(const Var& logits);
/// Mean squared error against a constant real target.
Var mse(const Var& prediction, const Tensor& target);

/// Sum of a tensor over broadcast dimensions down to `shape`.
Tensor reduce_to_shape(const Tensor& t, const Shape& shape);

}  // namespace hnn
