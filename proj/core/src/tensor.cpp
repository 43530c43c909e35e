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

#include "hybridnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hybridnn/errors.hpp"

namespace hnn {

std::string to_string(DType dtype) {
  return dtype == DType::Real64 ? "real64" : "complex128";
}

DType dtype_from_string(const std::string& name) {
  if (name == "real64") return DType::Real64;
  if (name == "complex128") return DType::Complex128;
  throw ShapeError("unknown dtype '" + name + "'");
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < a.size() ? a[a.size() - 1 - i] : 1;
    const std::size_t db = i < b.size() ? b[b.size() - 1 - i] : 1;
    if (da != db && da != 1 && db != 1) {
      throw ShapeError("cannot broadcast " + shape_to_string(a) + " with " +
                       shape_to_string(b));
    }
    out[rank - 1 - i] = da == 1 ? db : da;
  }
  return out;
}

Tensor::Tensor() : shape_{0}, data_(std::vector<double>{}) {}

Tensor::Tensor(Shape shape, DType dtype) : shape_(std::move(shape)), dtype_(dtype) {
  const std::size_t n = shape_numel(shape_);
  if (dtype_ == DType::Real64) {
    data_ = std::vector<double>(n, 0.0);
  } else {
    data_ = std::vector<cplx>(n, cplx{});
  }
}

Tensor Tensor::real(Shape shape, std::vector<double> data) {
  if (shape_numel(shape) != data.size()) {
    throw ShapeError("shape " + shape_to_string(shape) + " does not match " +
                     std::to_string(data.size()) + " elements");
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.dtype_ = DType::Real64;
  t.data_ = std::move(data);
  return t;
}

Tensor Tensor::complex(Shape shape, std::vector<cplx> data) {
  if (shape_numel(shape) != data.size()) {
    throw ShapeError("shape " + shape_to_string(shape) + " does not match " +
                     std::to_string(data.size()) + " elements");
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.dtype_ = DType::Complex128;
  t.data_ = std::move(data);
  return t;
}

Tensor Tensor::scalar(double value) { return real({}, {value}); }
Tensor Tensor::scalar(cplx value) { return complex({}, {value}); }

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = shape_numel(shape);
  return real(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::full(Shape shape, cplx value) {
  const std::size_t n = shape_numel(shape);
  return complex(std::move(shape), std::vector<cplx>(n, value));
}

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_to_string(shape_));
  }
  return shape_[axis];
}

std::span<double> Tensor::real_data() {
  if (dtype_ != DType::Real64) throw ShapeError("real_data() on a complex tensor");
  return std::get<std::vector<double>>(data_);
}

std::span<const double> Tensor::real_data() const {
  if (dtype_ != DType::Real64) throw ShapeError("real_data() on a complex tensor");
  return std::get<std::vector<double>>(data_);
}

std::span<cplx> Tensor::complex_data() {
  if (dtype_ != DType::Complex128) throw ShapeError("complex_data() on a real tensor");
  return std::get<std::vector<cplx>>(data_);
}

std::span<const cplx> Tensor::complex_data() const {
  if (dtype_ != DType::Complex128) throw ShapeError("complex_data() on a real tensor");
  return std::get<std::vector<cplx>>(data_);
}

cplx Tensor::at(std::size_t i) const {
  if (i >= numel()) throw ShapeError("flat index out of range");
  if (dtype_ == DType::Real64) return std::get<std::vector<double>>(data_)[i];
  return std::get<std::vector<cplx>>(data_)[i];
}

cplx Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_to_string(shape_));
  }
  return at(0);
}

double Tensor::item_real() const {
  if (dtype_ != DType::Real64) throw ShapeError("item_real() on a complex tensor");
  return item().real();
}

Tensor Tensor::to_complex() const {
  if (is_complex()) return *this;
  const auto src = real_data();
  std::vector<cplx> out(src.begin(), src.end());
  return complex(shape_, std::move(out));
}

Tensor Tensor::real_part() const {
  if (!is_complex()) return *this;
  const auto src = complex_data();
  std::vector<double> out(src.size());
  std::transform(src.begin(), src.end(), out.begin(), [](cplx z) { return z.real(); });
  return real(shape_, std::move(out));
}

Tensor Tensor::imag_part() const {
  if (!is_complex()) return zeros(shape_, DType::Real64);
  const auto src = complex_data();
  std::vector<double> out(src.size());
  std::transform(src.begin(), src.end(), out.begin(), [](cplx z) { return z.imag(); });
  return real(shape_, std::move(out));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != numel()) {
    throw ShapeError("cannot reshape " + shape_to_string(shape_) + " to " +
                     shape_to_string(shape));
  }
  Tensor t = *this;
  t.shape_ = std::move(shape);
  return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("max_abs_diff shape mismatch " + shape_to_string(a.shape()) +
                     " vs " + shape_to_string(b.shape()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    worst = std::max(worst, std::abs(a.at(i) - b.at(i)));
  }
  return worst;
}

nlohmann::json tensor_to_json(const Tensor& tensor) {
  nlohmann::json j;
  j["shape"] = tensor.shape();
  j["dtype"] = to_string(tensor.dtype());
  auto data = nlohmann::json::array();
  if (tensor.is_complex()) {
    for (cplx z : tensor.complex_data()) {
      data.push_back(z.real());
      data.push_back(z.imag());
    }
  } else {
    for (double x : tensor.real_data()) data.push_back(x);
  }
  j["data"] = std::move(data);
  return j;
}

Tensor tensor_from_json(const nlohmann::json& j) {
  try {
    Shape shape = j.at("shape").get<Shape>();
    const DType dtype = dtype_from_string(j.at("dtype").get<std::string>());
    const auto& data = j.at("data");
    if (dtype == DType::Real64) {
      return Tensor::real(std::move(shape), data.get<std::vector<double>>());
    }
    const auto flat = data.get<std::vector<double>>();
    if (flat.size() % 2 != 0) throw ShapeError("odd-length complex tensor data");
    std::vector<cplx> values(flat.size() / 2);
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = {flat[2 * i], flat[2 * i + 1]};
    }
    return Tensor::complex(std::move(shape), std::move(values));
  } catch (const nlohmann::json::exception& e) {
    throw ShapeError(std::string("malformed tensor json: ") + e.what());
  }
}

}  // namespace hnn
