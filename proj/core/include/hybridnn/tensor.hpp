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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace hnn {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;

enum class DType { Real64, Complex128 };

std::string to_string(DType dtype);
DType dtype_from_string(const std::string& name);

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Trailing-dimension-aligned broadcast of two shapes; throws ShapeError when
/// a dimension pair is neither equal nor 1.
Shape broadcast_shapes(const Shape& a, const Shape& b);

/// Dense row-major n-dimensional array of float64 or complex128 elements.
///
/// Tensors are plain values: copying copies the buffer. The element type is
/// fixed at construction; use `to_complex()` / `real_part()` to move between
/// domains explicitly.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, DType dtype);

  static Tensor zeros(Shape shape, DType dtype) { return Tensor(std::move(shape), dtype); }
  static Tensor real(Shape shape, std::vector<double> data);
  static Tensor complex(Shape shape, std::vector<cplx> data);
  static Tensor scalar(double value);
  static Tensor scalar(cplx value);
  static Tensor full(Shape shape, double value);
  static Tensor full(Shape shape, cplx value);

  const Shape& shape() const { return shape_; }
  std::size_t dim() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t numel() const { return shape_numel(shape_); }
  DType dtype() const { return dtype_; }
  bool is_complex() const { return dtype_ == DType::Complex128; }

  /// Throws ShapeError if the tensor is complex.
  std::span<double> real_data();
  std::span<const double> real_data() const;
  /// Throws ShapeError if the tensor is real.
  std::span<cplx> complex_data();
  std::span<const cplx> complex_data() const;

  /// Element `i` of the flat buffer, promoted to complex.
  cplx at(std::size_t i) const;
  /// The single element of a one-element tensor.
  cplx item() const;
  double item_real() const;

  Tensor to_complex() const;
  Tensor real_part() const;
  Tensor imag_part() const;
  Tensor reshaped(Shape shape) const;

  bool same_layout(const Tensor& other) const {
    return dtype_ == other.dtype_ && shape_ == other.shape_;
  }

 private:
  Shape shape_;
  DType dtype_ = DType::Real64;
  std::variant<std::vector<double>, std::vector<cplx>> data_;
};

/// Largest absolute elementwise difference; tensors must share a shape.
double max_abs_diff(const Tensor& a, const Tensor& b);

// Serialization: {"shape":[...], "dtype":"real64"|"complex128", "data":[...]}
// with complex data interleaved as [re, im, re, im, ...].
nlohmann::json tensor_to_json(const Tensor& tensor);
Tensor tensor_from_json(const nlohmann::json& j);

}  // namespace hnn
