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

#include "hybridnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "hybridnn/errors.hpp"

namespace hnn {
namespace {

// ---------------------------------------------------------------------------
// Typed access helpers

template <class T>
std::span<const T> view(const Tensor& t);
template <>
std::span<const double> view<double>(const Tensor& t) { return t.real_data(); }
template <>
std::span<const cplx> view<cplx>(const Tensor& t) { return t.complex_data(); }

template <class T>
std::span<T> mview(Tensor& t);
template <>
std::span<double> mview<double>(Tensor& t) { return t.real_data(); }
template <>
std::span<cplx> mview<cplx>(Tensor& t) { return t.complex_data(); }

template <class T>
constexpr DType dtype_of() {
  return std::is_same_v<T, double> ? DType::Real64 : DType::Complex128;
}

inline double cj(double x) { return x; }
inline cplx cj(cplx z) { return std::conj(z); }

template <class Fn>
decltype(auto) dispatch(DType dt, Fn&& fn) {
  if (dt == DType::Real64) return fn(double{});
  return fn(cplx{});
}

void require_same_dtype(const Var& a, const Var& b, const char* op) {
  if (a.dtype() != b.dtype()) {
    throw ShapeError(std::string(op) + ": mixed dtypes " + to_string(a.dtype()) + " and " +
                     to_string(b.dtype()) + " (promote explicitly with to_complex)");
  }
}

void require_real(const Var& a, const char* op) {
  if (a.is_complex()) throw ShapeError(std::string(op) + " expects a real tensor");
}

std::vector<std::size_t> row_major_strides(const Shape& s) {
  std::vector<std::size_t> strides(s.size(), 1);
  for (std::size_t i = s.size(); i-- > 1;) strides[i - 1] = strides[i] * s[i];
  return strides;
}

// ---------------------------------------------------------------------------
// Broadcasting

struct BroadcastPlan {
  Shape out;
  std::vector<std::size_t> sa, sb;
  bool same = false;
};

std::vector<std::size_t> aligned_strides(const Shape& src, const Shape& out) {
  const auto base = row_major_strides(src);
  const std::size_t offset = out.size() - src.size();
  std::vector<std::size_t> strides(out.size(), 0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    strides[offset + i] = (src[i] == 1 && out[offset + i] != 1) ? 0 : base[i];
  }
  return strides;
}

BroadcastPlan make_plan(const Shape& a, const Shape& b) {
  BroadcastPlan p;
  p.out = broadcast_shapes(a, b);
  p.same = (a == b);
  p.sa = aligned_strides(a, p.out);
  p.sb = aligned_strides(b, p.out);
  return p;
}

template <class F>
void for_each_index(const Shape& out, const std::vector<std::size_t>& sa,
                    const std::vector<std::size_t>& sb, F&& f) {
  const std::size_t n = shape_numel(out);
  if (n == 0) return;
  const std::size_t rank = out.size();
  if (rank == 0) {
    f(std::size_t{0}, std::size_t{0}, std::size_t{0});
    return;
  }
  std::vector<std::size_t> idx(rank, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < n; ++i) {
    f(i, ia, ib);
    for (std::size_t d = rank; d-- > 0;) {
      ++idx[d];
      ia += sa[d];
      ib += sb[d];
      if (idx[d] < out[d]) break;
      ia -= sa[d] * out[d];
      ib -= sb[d] * out[d];
      idx[d] = 0;
    }
  }
}

template <class F>
void for_each_broadcast(const BroadcastPlan& p, F&& f) {
  if (p.same) {
    const std::size_t n = shape_numel(p.out);
    for (std::size_t i = 0; i < n; ++i) f(i, i, i);
    return;
  }
  for_each_index(p.out, p.sa, p.sb, f);
}

// Binary op skeleton. `fwd(a, b)` computes the value; `bwd(g, a, b, y, ga, gb)`
// writes per-element contributions (already conjugation-aware) to ga/gb.
template <class Fwd, class Bwd>
Var binary_op(const Var& a, const Var& b, const char* name, Fwd fwd, Bwd bwd) {
  require_same_dtype(a, b, name);
  auto plan = make_plan(a.shape(), b.shape());
  Tensor out(plan.out, a.dtype());
  dispatch(a.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto av = view<T>(a.value());
    auto bv = view<T>(b.value());
    auto ov = mview<T>(out);
    for_each_broadcast(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
      ov[i] = fwd(av[ia], bv[ib]);
    });
  });
  return Var::from_op(std::move(out), {a, b},
                      [a, b, plan, bwd](const Tensor& g, GradAccumulator& acc) {
    const bool wa = acc.wants(0), wb = acc.wants(1);
    Tensor ga, gb;
    if (wa) ga = Tensor(a.shape(), a.dtype());
    if (wb) gb = Tensor(b.shape(), b.dtype());
    dispatch(a.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto av = view<T>(a.value());
      auto bv = view<T>(b.value());
      auto gv = view<T>(g);
      std::span<T> gav = wa ? mview<T>(ga) : std::span<T>{};
      std::span<T> gbv = wb ? mview<T>(gb) : std::span<T>{};
      for_each_broadcast(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
        T da{}, db{};
        bwd(gv[i], av[ia], bv[ib], da, db);
        if (wa) gav[ia] += da;
        if (wb) gbv[ib] += db;
      });
    });
    if (wa) acc.add(0, std::move(ga));
    if (wb) acc.add(1, std::move(gb));
  });
}

// Unary op whose output has the input dtype. `bwd(g, x, y)` returns the
// contribution in the split-real convention.
template <class Fwd, class Bwd>
Var unary_same(const Var& a, Fwd fwd, Bwd bwd) {
  Tensor out(a.shape(), a.dtype());
  dispatch(a.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto av = view<T>(a.value());
    auto ov = mview<T>(out);
    for (std::size_t i = 0; i < av.size(); ++i) ov[i] = fwd(av[i]);
  });
  auto result = Var::from_op(std::move(out), {a}, {});
  if (!result.requires_grad()) return result;
  // The closure needs the output value; capture it through a weak reference
  // to the node to avoid a cycle.
  detail::Node* self = result.node();
  self->backward = [a, self, bwd](const Tensor& g, GradAccumulator& acc) {
    Tensor ga(a.shape(), a.dtype());
    dispatch(a.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto av = view<T>(a.value());
      auto yv = view<T>(self->value);
      auto gv = view<T>(g);
      auto out = mview<T>(ga);
      for (std::size_t i = 0; i < av.size(); ++i) out[i] = bwd(gv[i], av[i], yv[i]);
    });
    acc.add(0, std::move(ga));
  };
  return result;
}

// Real-only unary op.
template <class Fwd, class Bwd>
Var unary_real(const Var& a, const char* name, Fwd fwd, Bwd bwd) {
  require_real(a, name);
  return unary_same(a, [fwd](auto x) {
    if constexpr (std::is_same_v<decltype(x), double>) return fwd(x);
    else return x;
  }, [bwd](auto g, auto x, auto y) {
    if constexpr (std::is_same_v<decltype(x), double>) return bwd(g, x, y);
    else return g;
  });
}

double principal_arg(cplx z) {
  if (z == cplx{}) return 0.0;
  const double t = std::arg(z);
  return t <= -std::numbers::pi ? std::numbers::pi : t;
}

Tensor map_real(const Tensor& t, double (*f)(double)) {
  Tensor out(t.shape(), DType::Real64);
  auto ov = out.real_data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = f(t.at(i).real());
  return out;
}

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMat<T>>;
template <class T>
using CMatMap = Eigen::Map<const RowMat<T>>;

std::size_t outer_size(const Shape& s, std::size_t axis) {
  return std::accumulate(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(axis),
                         std::size_t{1}, std::multiplies<>());
}

std::size_t inner_size(const Shape& s, std::size_t axis) {
  return std::accumulate(s.begin() + static_cast<std::ptrdiff_t>(axis) + 1, s.end(),
                         std::size_t{1}, std::multiplies<>());
}

}  // namespace

// ---------------------------------------------------------------------------
// Broadcast reduction

Tensor reduce_to_shape(const Tensor& t, const Shape& shape) {
  if (t.shape() == shape) return t;
  if (shape.size() > t.dim()) throw ShapeError("reduce_to_shape: target has higher rank");
  Tensor out(shape, t.dtype());
  const auto st = aligned_strides(shape, t.shape());
  const std::vector<std::size_t> dummy(t.dim(), 0);
  // Validate broadcast compatibility.
  (void)broadcast_shapes(shape, t.shape());
  dispatch(t.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto tv = view<T>(t);
    auto ov = mview<T>(out);
    for_each_index(t.shape(), st, dummy,
                   [&](std::size_t i, std::size_t io, std::size_t) { ov[io] += tv[i]; });
  });
  return out;
}

// ---------------------------------------------------------------------------
// Binary elementwise

Var add(const Var& a, const Var& b) {
  return binary_op(a, b, "add", [](auto x, auto y) { return x + y; },
                   [](auto g, auto, auto, auto& da, auto& db) { da = g; db = g; });
}

Var sub(const Var& a, const Var& b) {
  return binary_op(a, b, "sub", [](auto x, auto y) { return x - y; },
                   [](auto g, auto, auto, auto& da, auto& db) { da = g; db = -g; });
}

Var mul(const Var& a, const Var& b) {
  return binary_op(a, b, "mul", [](auto x, auto y) { return x * y; },
                   [](auto g, auto x, auto y, auto& da, auto& db) {
                     da = g * cj(y);
                     db = g * cj(x);
                   });
}

Var div(const Var& a, const Var& b) {
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < bv.numel(); ++i) {
    if (bv.at(i) == cplx{}) throw ArgumentError("div: division by zero");
  }
  return binary_op(a, b, "div", [](auto x, auto y) { return x / y; },
                   [](auto g, auto x, auto y, auto& da, auto& db) {
                     using T = decltype(x);
                     const T inv = T(1) / y;
                     da = g * cj(inv);
                     db = -g * cj(x * inv * inv);
                   });
}

Var div_guarded(const Var& a, const Var& b, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("div_guarded: eps must be positive");
  return div(a, add_scalar(b, eps));
}

Var maximum(const Var& a, const Var& b) {
  require_real(a, "maximum");
  require_real(b, "maximum");
  return binary_op(a, b, "maximum",
                   [](auto x, auto y) {
                     if constexpr (std::is_same_v<decltype(x), double>) return x >= y ? x : y;
                     else return x;
                   },
                   [](auto g, auto x, auto y, auto& da, auto& db) {
                     if constexpr (std::is_same_v<decltype(x), double>) {
                       if (x >= y) da = g; else db = g;
                     }
                   });
}

// ---------------------------------------------------------------------------
// Unary elementwise

Var neg(const Var& a) {
  return unary_same(a, [](auto x) { return -x; }, [](auto g, auto, auto) { return -g; });
}

Var conj(const Var& a) {
  return unary_same(a, [](auto x) { return cj(x); }, [](auto g, auto, auto) { return cj(g); });
}

Var abs(const Var& a) {
  Tensor out(a.shape(), DType::Real64);
  auto ov = out.real_data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::abs(a.value().at(i));
  return Var::from_op(std::move(out), {a}, [a](const Tensor& g, GradAccumulator& acc) {
    const auto gv = g.real_data();
    Tensor ga(a.shape(), a.dtype());
    if (a.is_complex()) {
      const auto zv = a.value().complex_data();
      auto out = ga.complex_data();
      for (std::size_t i = 0; i < zv.size(); ++i) {
        const double m = std::abs(zv[i]);
        out[i] = m > 0.0 ? gv[i] * zv[i] / m : cplx{};
      }
    } else {
      const auto xv = a.value().real_data();
      auto out = ga.real_data();
      for (std::size_t i = 0; i < xv.size(); ++i) {
        out[i] = xv[i] > 0 ? gv[i] : (xv[i] < 0 ? -gv[i] : 0.0);
      }
    }
    acc.add(0, std::move(ga));
  });
}

Var arg(const Var& a) {
  Tensor out(a.shape(), DType::Real64);
  auto ov = out.real_data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = principal_arg(a.value().at(i));
  return Var::from_op(std::move(out), {a}, [a](const Tensor& g, GradAccumulator& acc) {
    Tensor ga(a.shape(), a.dtype());
    if (a.is_complex()) {
      const auto gv = g.real_data();
      const auto zv = a.value().complex_data();
      auto out = ga.complex_data();
      for (std::size_t i = 0; i < zv.size(); ++i) {
        const double m2 = std::norm(zv[i]);
        out[i] = m2 > 0.0 ? gv[i] * cplx(0, 1) * zv[i] / m2 : cplx{};
      }
    }
    acc.add(0, std::move(ga));
  });
}

Var exp(const Var& a) {
  return unary_same(a, [](auto x) { return std::exp(x); },
                    [](auto g, auto, auto y) { return g * cj(y); });
}

Var sqrt(const Var& a) {
  if (!a.is_complex()) {
    for (double x : a.value().real_data()) {
      if (x < 0) throw ArgumentError("sqrt of a negative real; promote to complex first");
    }
  }
  return unary_same(a, [](auto x) { return std::sqrt(x); },
                    [](auto g, auto, auto y) {
                      using T = decltype(y);
                      return y == T{} ? T{} : g * cj(T(1) / (T(2) * y));
                    });
}

Var real(const Var& a) {
  if (!a.is_complex()) return a;
  return Var::from_op(a.value().real_part(), {a}, [](const Tensor& g, GradAccumulator& acc) {
    acc.add(0, g.to_complex());
  });
}

Var imag(const Var& a) {
  if (!a.is_complex()) return Var(Tensor(a.shape(), DType::Real64));
  return Var::from_op(a.value().imag_part(), {a}, [](const Tensor& g, GradAccumulator& acc) {
    Tensor ga(g.shape(), DType::Complex128);
    auto out = ga.complex_data();
    const auto gv = g.real_data();
    for (std::size_t i = 0; i < gv.size(); ++i) out[i] = {0.0, gv[i]};
    acc.add(0, std::move(ga));
  });
}

Var sign(const Var& a) {
  require_real(a, "sign");
  return Var(map_real(a.value(), [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }));
}

Var log(const Var& a) {
  require_real(a, "log");
  for (double x : a.value().real_data()) {
    if (!(x > 0)) throw ArgumentError("log of a non-positive value");
  }
  return unary_real(a, "log", [](double x) { return std::log(x); },
                    [](double g, double x, double) { return g / x; });
}

Var tanh(const Var& a) {
  return unary_real(a, "tanh", [](double x) { return std::tanh(x); },
                    [](double g, double, double y) { return g * (1.0 - y * y); });
}

Var softplus(const Var& a) {
  return unary_real(
      a, "softplus",
      [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
      [](double g, double x, double) { return g / (1.0 + std::exp(-x)); });
}

Var elu(const Var& a) {
  return unary_real(a, "elu", [](double x) { return x > 0 ? x : std::expm1(x); },
                    [](double g, double x, double y) { return x > 0 ? g : g * (y + 1.0); });
}

Var relu(const Var& a) {
  return unary_real(a, "relu", [](double x) { return x > 0 || std::isnan(x) ? x : 0.0; },
                    [](double g, double x, double) { return x > 0 ? g : 0.0; });
}

Var scale(const Var& a, cplx factor) {
  if (!a.is_complex()) {
    if (factor.imag() != 0.0) {
      throw ShapeError("scale: complex factor on a real tensor (promote first)");
    }
    return scale(a, factor.real());
  }
  return unary_same(a, [factor](auto x) {
    if constexpr (std::is_same_v<decltype(x), cplx>) return x * factor;
    else return x;
  }, [factor](auto g, auto, auto) {
    if constexpr (std::is_same_v<decltype(g), cplx>) return g * std::conj(factor);
    else return g;
  });
}

Var scale(const Var& a, double factor) {
  return unary_same(a, [factor](auto x) { return x * factor; },
                    [factor](auto g, auto, auto) { return g * factor; });
}

Var add_scalar(const Var& a, cplx offset) {
  if (!a.is_complex()) {
    if (offset.imag() != 0.0) {
      throw ShapeError("add_scalar: complex offset on a real tensor (promote first)");
    }
    return add_scalar(a, offset.real());
  }
  return unary_same(a, [offset](auto x) {
    if constexpr (std::is_same_v<decltype(x), cplx>) return x + offset;
    else return x;
  }, [](auto g, auto, auto) { return g; });
}

Var add_scalar(const Var& a, double offset) {
  return unary_same(a, [offset](auto x) { return x + offset; },
                    [](auto g, auto, auto) { return g; });
}

Var powi(const Var& a, int n) {
  if (n < 0) throw ArgumentError("powi: negative exponent");
  if (n == 0) {
    return a.is_complex() ? Var(Tensor::full(a.shape(), cplx{1.0, 0.0}))
                          : Var(Tensor::full(a.shape(), 1.0));
  }
  Var result = a;
  for (int i = 1; i < n; ++i) result = mul(result, a);
  return result;
}

Var to_complex(const Var& a) {
  if (a.is_complex()) return a;
  return Var::from_op(a.value().to_complex(), {a}, [](const Tensor& g, GradAccumulator& acc) {
    acc.add(0, g.real_part());
  });
}

Var make_complex(const Var& re, const Var& im) {
  require_real(re, "make_complex");
  require_real(im, "make_complex");
  if (re.shape() != im.shape()) throw ShapeError("make_complex: shape mismatch");
  Tensor out(re.shape(), DType::Complex128);
  auto ov = out.complex_data();
  const auto rv = re.value().real_data();
  const auto iv = im.value().real_data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = {rv[i], iv[i]};
  return Var::from_op(std::move(out), {re, im}, [](const Tensor& g, GradAccumulator& acc) {
    if (acc.wants(0)) acc.add(0, g.real_part());
    if (acc.wants(1)) acc.add(1, g.imag_part());
  });
}

// ---------------------------------------------------------------------------
// Reductions

Var sum(const Var& a) {
  Tensor out({}, a.dtype());
  dispatch(a.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto av = view<T>(a.value());
    mview<T>(out)[0] = std::accumulate(av.begin(), av.end(), T{});
  });
  return Var::from_op(std::move(out), {a}, [a](const Tensor& g, GradAccumulator& acc) {
    acc.add(0, a.is_complex() ? Tensor::full(a.shape(), g.at(0))
                              : Tensor::full(a.shape(), g.at(0).real()));
  });
}

Var mean(const Var& a) {
  const std::size_t n = a.value().numel();
  if (n == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var sum_axes(const Var& a, const std::vector<std::size_t>& axes) {
  Shape reduced = a.shape();
  for (auto ax : axes) {
    if (ax >= reduced.size()) throw ShapeError("sum_axes: axis out of range");
    reduced[ax] = 1;
  }
  Tensor out = reduce_to_shape(a.value(), reduced);
  return Var::from_op(std::move(out), {a}, [a](const Tensor& g, GradAccumulator& acc) {
    Tensor ga(a.shape(), a.dtype());
    auto plan = make_plan(a.shape(), g.shape());
    dispatch(a.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto gv = view<T>(g);
      auto out = mview<T>(ga);
      for_each_broadcast(plan, [&](std::size_t i, std::size_t, std::size_t ig) {
        out[i] = gv[ig];
      });
    });
    acc.add(0, std::move(ga));
  });
}

Var mean_axes(const Var& a, const std::vector<std::size_t>& axes) {
  std::size_t count = 1;
  for (auto ax : axes) count *= a.value().extent(ax);
  if (count == 0) throw ShapeError("mean_axes over an empty extent");
  return scale(sum_axes(a, axes), 1.0 / static_cast<double>(count));
}

// ---------------------------------------------------------------------------
// Shape manipulation

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return Var::from_op(std::move(out), {a}, [a](const Tensor& g, GradAccumulator& acc) {
    acc.add(0, g.reshaped(a.shape()));
  });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const Var& first = parts.front();
  if (axis >= first.value().dim()) throw ShapeError("concat: axis out of range");
  Shape out_shape = first.shape();
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    require_same_dtype(first, p, "concat");
    if (p.value().dim() != first.value().dim()) throw ShapeError("concat: rank mismatch");
    for (std::size_t d = 0; d < out_shape.size(); ++d) {
      if (d != axis && p.shape()[d] != first.shape()[d]) {
        throw ShapeError("concat: incompatible shapes " + shape_to_string(first.shape()) +
                         " and " + shape_to_string(p.shape()));
      }
    }
    out_shape[axis] += p.shape()[axis];
  }
  if (parts.size() == 1) return first;
  const std::size_t outer = outer_size(out_shape, axis);
  const std::size_t inner = inner_size(out_shape, axis);
  Tensor out(out_shape, first.dtype());
  dispatch(first.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto ov = mview<T>(out);
    std::size_t offset = 0;
    for (const auto& p : parts) {
      auto pv = view<T>(p.value());
      const std::size_t chunk = p.shape()[axis] * inner;
      for (std::size_t o = 0; o < outer; ++o) {
        std::copy_n(pv.begin() + o * chunk, chunk,
                    ov.begin() + o * out_shape[axis] * inner + offset);
      }
      offset += chunk;
    }
  });
  std::vector<Var> inputs(parts.begin(), parts.end());
  std::vector<Shape> shapes;
  for (const auto& p : parts) shapes.push_back(p.shape());
  return Var::from_op(std::move(out), inputs,
                      [shapes, axis, outer, inner, total = out_shape[axis]](
                          const Tensor& g, GradAccumulator& acc) {
    dispatch(g.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto gv = view<T>(g);
      std::size_t offset = 0;
      for (std::size_t k = 0; k < shapes.size(); ++k) {
        const std::size_t chunk = shapes[k][axis] * inner;
        if (acc.wants(k)) {
          Tensor gp(shapes[k], g.dtype());
          auto out = mview<T>(gp);
          for (std::size_t o = 0; o < outer; ++o) {
            std::copy_n(gv.begin() + o * total * inner + offset, chunk,
                        out.begin() + o * chunk);
          }
          acc.add(k, std::move(gp));
        }
        offset += chunk;
      }
    });
  });
}

Var slice(const Var& a, std::size_t axis, std::size_t start, std::size_t length) {
  const Shape& in_shape = a.shape();
  if (axis >= in_shape.size()) throw ShapeError("slice: axis out of range");
  if (start + length > in_shape[axis]) throw ShapeError("slice: range out of bounds");
  Shape out_shape = in_shape;
  out_shape[axis] = length;
  const std::size_t outer = outer_size(in_shape, axis);
  const std::size_t inner = inner_size(in_shape, axis);
  const std::size_t extent = in_shape[axis];
  Tensor out(out_shape, a.dtype());
  dispatch(a.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto av = view<T>(a.value());
    auto ov = mview<T>(out);
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(av.begin() + (o * extent + start) * inner, length * inner,
                  ov.begin() + o * length * inner);
    }
  });
  return Var::from_op(std::move(out), {a},
                      [a, outer, inner, extent, start, length](const Tensor& g,
                                                               GradAccumulator& acc) {
    Tensor ga(a.shape(), a.dtype());
    dispatch(a.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto gv = view<T>(g);
      auto out = mview<T>(ga);
      for (std::size_t o = 0; o < outer; ++o) {
        std::copy_n(gv.begin() + o * length * inner, length * inner,
                    out.begin() + (o * extent + start) * inner);
      }
    });
    acc.add(0, std::move(ga));
  });
}

Var select(const Var& a, std::size_t axis, std::size_t index) {
  Var s = slice(a, axis, index, 1);
  Shape shape = a.shape();
  shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
  return reshape(s, std::move(shape));
}

Var stack(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("stack of zero tensors");
  std::vector<Var> expanded;
  expanded.reserve(parts.size());
  for (const auto& p : parts) {
    if (p.shape() != parts.front().shape()) throw ShapeError("stack: shape mismatch");
    Shape shape = p.shape();
    if (axis > shape.size()) throw ShapeError("stack: axis out of range");
    shape.insert(shape.begin() + static_cast<std::ptrdiff_t>(axis), 1);
    expanded.push_back(reshape(p, std::move(shape)));
  }
  if (expanded.size() == 1) return expanded.front();
  return concat(expanded, axis);
}

// ---------------------------------------------------------------------------
// Linear algebra

Var matmul(const Var& a, const Var& b) {
  require_same_dtype(a, b, "matmul");
  if (a.value().dim() != 2 || b.value().dim() != 2) throw ShapeError("matmul expects 2-D operands");
  const std::size_t n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: inner dimensions differ " + shape_to_string(a.shape()) + " x " +
                     shape_to_string(b.shape()));
  }
  Tensor out({n, m}, a.dtype());
  dispatch(a.dtype(), [&](auto tag) {
    using T = decltype(tag);
    CMatMap<T> A(view<T>(a.value()).data(), n, k);
    CMatMap<T> B(view<T>(b.value()).data(), k, m);
    MatMap<T> Y(mview<T>(out).data(), n, m);
    Y.noalias() = A * B;
  });
  return Var::from_op(std::move(out), {a, b}, [a, b, n, k, m](const Tensor& g,
                                                            GradAccumulator& acc) {
    dispatch(g.dtype(), [&](auto tag) {
      using T = decltype(tag);
      CMatMap<T> A(view<T>(a.value()).data(), n, k);
      CMatMap<T> B(view<T>(b.value()).data(), k, m);
      CMatMap<T> G(view<T>(g).data(), n, m);
      if (acc.wants(0)) {
        Tensor ga({n, k}, g.dtype());
        MatMap<T>(mview<T>(ga).data(), n, k).noalias() = G * B.adjoint();
        acc.add(0, std::move(ga));
      }
      if (acc.wants(1)) {
        Tensor gb({k, m}, g.dtype());
        MatMap<T>(mview<T>(gb).data(), k, m).noalias() = A.adjoint() * G;
        acc.add(1, std::move(gb));
      }
    });
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  require_same_dtype(x, weight, "linear");
  if (x.value().dim() != 2 || weight.value().dim() != 2) {
    throw ShapeError("linear expects x [N, in] and weight [out, in]");
  }
  const std::size_t n = x.shape()[0], in = x.shape()[1], out_f = weight.shape()[0];
  if (weight.shape()[1] != in) {
    throw ShapeError("linear: input width " + std::to_string(in) + " does not match weight " +
                     shape_to_string(weight.shape()));
  }
  const bool has_bias = bias.defined();
  if (has_bias) {
    require_same_dtype(x, bias, "linear");
    if (bias.shape() != Shape{out_f}) throw ShapeError("linear: bias shape mismatch");
  }
  Tensor out({n, out_f}, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    CMatMap<T> X(view<T>(x.value()).data(), n, in);
    CMatMap<T> W(view<T>(weight.value()).data(), out_f, in);
    MatMap<T> Y(mview<T>(out).data(), n, out_f);
    Y.noalias() = X * W.transpose();
    if (has_bias) {
      Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bv(view<T>(bias.value()).data(),
                                                               out_f);
      Y.rowwise() += bv;
    }
  });
  std::vector<Var> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return Var::from_op(std::move(out), inputs, [x, weight, n, in, out_f](
                                                  const Tensor& g, GradAccumulator& acc) {
    dispatch(g.dtype(), [&](auto tag) {
      using T = decltype(tag);
      CMatMap<T> X(view<T>(x.value()).data(), n, in);
      CMatMap<T> W(view<T>(weight.value()).data(), out_f, in);
      CMatMap<T> G(view<T>(g).data(), n, out_f);
      if (acc.wants(0)) {
        Tensor gx({n, in}, g.dtype());
        MatMap<T>(mview<T>(gx).data(), n, in).noalias() = G * W.conjugate();
        acc.add(0, std::move(gx));
      }
      if (acc.wants(1)) {
        Tensor gw({out_f, in}, g.dtype());
        MatMap<T>(mview<T>(gw).data(), out_f, in).noalias() = G.transpose() * X.conjugate();
        acc.add(1, std::move(gw));
      }
      if (acc.wants(2)) {
        Tensor gb({out_f}, g.dtype());
        Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(mview<T>(gb).data(), out_f) =
            G.colwise().sum();
        acc.add(2, std::move(gb));
      }
    });
  });
}

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride) {
  (void)kernel;
  return (length + stride - 1) / stride;
}

namespace {

struct ConvGeometry {
  std::size_t batch, cin, length, cout, kernel, stride, groups;
  std::size_t cin_g, cout_g, out_len, pad_left;
};

// im2col for one group: col [cin_g * K, batch * out_len].
template <class T>
void im2col(const ConvGeometry& cg, std::span<const T> x, std::size_t group,
            RowMat<T>& col) {
  col.setZero(static_cast<Eigen::Index>(cg.cin_g * cg.kernel),
              static_cast<Eigen::Index>(cg.batch * cg.out_len));
  for (std::size_t c = 0; c < cg.cin_g; ++c) {
    const std::size_t ch = group * cg.cin_g + c;
    for (std::size_t k = 0; k < cg.kernel; ++k) {
      const std::size_t row = c * cg.kernel + k;
      T* dst = col.data() + row * cg.batch * cg.out_len;
      for (std::size_t b = 0; b < cg.batch; ++b) {
        const T* src = x.data() + (b * cg.cin + ch) * cg.length;
        for (std::size_t t = 0; t < cg.out_len; ++t) {
          const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t * cg.stride + k) -
                                     static_cast<std::ptrdiff_t>(cg.pad_left);
          if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(cg.length)) {
            dst[b * cg.out_len + t] = src[pos];
          }
        }
      }
    }
  }
}

template <class T>
void col2im_add(const ConvGeometry& cg, const RowMat<T>& col, std::size_t group,
                std::span<T> dx) {
  for (std::size_t c = 0; c < cg.cin_g; ++c) {
    const std::size_t ch = group * cg.cin_g + c;
    for (std::size_t k = 0; k < cg.kernel; ++k) {
      const std::size_t row = c * cg.kernel + k;
      const T* src = col.data() + row * cg.batch * cg.out_len;
      for (std::size_t b = 0; b < cg.batch; ++b) {
        T* dst = dx.data() + (b * cg.cin + ch) * cg.length;
        for (std::size_t t = 0; t < cg.out_len; ++t) {
          const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t * cg.stride + k) -
                                     static_cast<std::ptrdiff_t>(cg.pad_left);
          if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(cg.length)) {
            dst[pos] += src[b * cg.out_len + t];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv1d(const Var& x, const Var& weight, const Var& bias, Conv1dOptions options) {
  require_same_dtype(x, weight, "conv1d");
  if (x.value().dim() != 3) throw ShapeError("conv1d expects input [batch, channels, length]");
  if (weight.value().dim() != 3) throw ShapeError("conv1d expects weight [out, in/groups, kernel]");
  if (options.stride == 0 || options.groups == 0) {
    throw ArgumentError("conv1d: stride and groups must be positive");
  }
  ConvGeometry cg{};
  cg.batch = x.shape()[0];
  cg.cin = x.shape()[1];
  cg.length = x.shape()[2];
  cg.cout = weight.shape()[0];
  cg.kernel = weight.shape()[2];
  cg.stride = options.stride;
  cg.groups = options.groups;
  if (cg.cin % cg.groups != 0 || cg.cout % cg.groups != 0) {
    throw ShapeError("conv1d: channels not divisible by groups");
  }
  cg.cin_g = cg.cin / cg.groups;
  cg.cout_g = cg.cout / cg.groups;
  if (weight.shape()[1] != cg.cin_g) {
    throw ShapeError("conv1d: weight " + shape_to_string(weight.shape()) +
                     " incompatible with " + std::to_string(cg.cin) + " input channels and " +
                     std::to_string(cg.groups) + " groups");
  }
  if (cg.length < cg.kernel) {
    throw ShapeError("conv1d: input length " + std::to_string(cg.length) +
                     " shorter than kernel " + std::to_string(cg.kernel));
  }
  cg.out_len = conv1d_output_length(cg.length, cg.kernel, cg.stride);
  const std::size_t needed = (cg.out_len - 1) * cg.stride + cg.kernel;
  cg.pad_left = needed > cg.length ? (needed - cg.length) / 2 : 0;
  const bool has_bias = bias.defined();
  if (has_bias) {
    require_same_dtype(x, bias, "conv1d");
    if (bias.shape() != Shape{cg.cout}) throw ShapeError("conv1d: bias shape mismatch");
  }

  Tensor out({cg.batch, cg.cout, cg.out_len}, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto xv = view<T>(x.value());
    auto ov = mview<T>(out);
    const T* wdata = view<T>(weight.value()).data();
    RowMat<T> col, y;
    for (std::size_t g = 0; g < cg.groups; ++g) {
      im2col<T>(cg, xv, g, col);
      CMatMap<T> W(wdata + g * cg.cout_g * cg.cin_g * cg.kernel, cg.cout_g,
                   cg.cin_g * cg.kernel);
      y.noalias() = W * col;
      for (std::size_t o = 0; o < cg.cout_g; ++o) {
        const std::size_t ch = g * cg.cout_g + o;
        const T b = has_bias ? view<T>(bias.value())[ch] : T{};
        for (std::size_t bi = 0; bi < cg.batch; ++bi) {
          T* dst = ov.data() + (bi * cg.cout + ch) * cg.out_len;
          const T* src = y.data() + o * cg.batch * cg.out_len + bi * cg.out_len;
          for (std::size_t t = 0; t < cg.out_len; ++t) dst[t] = src[t] + b;
        }
      }
    }
  });

  std::vector<Var> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return Var::from_op(std::move(out), inputs, [x, weight, cg](const Tensor& g,
                                                            GradAccumulator& acc) {
    dispatch(g.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto xv = view<T>(x.value());
      auto gv = view<T>(g);
      const T* wdata = view<T>(weight.value()).data();
      const bool want_x = acc.wants(0), want_w = acc.wants(1), want_b = acc.wants(2);
      Tensor gx, gw, gb;
      if (want_x) gx = Tensor(x.shape(), g.dtype());
      if (want_w) gw = Tensor(weight.shape(), g.dtype());
      if (want_b) gb = Tensor({cg.cout}, g.dtype());
      RowMat<T> col, gy(cg.cout_g, cg.batch * cg.out_len), dcol;
      for (std::size_t grp = 0; grp < cg.groups; ++grp) {
        for (std::size_t o = 0; o < cg.cout_g; ++o) {
          const std::size_t ch = grp * cg.cout_g + o;
          for (std::size_t bi = 0; bi < cg.batch; ++bi) {
            const T* src = gv.data() + (bi * cg.cout + ch) * cg.out_len;
            std::copy_n(src, cg.out_len, gy.data() + o * cg.batch * cg.out_len + bi * cg.out_len);
          }
        }
        if (want_b) {
          auto gbv = mview<T>(gb);
          for (std::size_t o = 0; o < cg.cout_g; ++o) gbv[grp * cg.cout_g + o] = gy.row(o).sum();
        }
        CMatMap<T> W(wdata + grp * cg.cout_g * cg.cin_g * cg.kernel, cg.cout_g,
                     cg.cin_g * cg.kernel);
        if (want_w) {
          im2col<T>(cg, xv, grp, col);
          MatMap<T>(mview<T>(gw).data() + grp * cg.cout_g * cg.cin_g * cg.kernel, cg.cout_g,
                    cg.cin_g * cg.kernel)
              .noalias() = gy * col.adjoint();
        }
        if (want_x) {
          dcol.noalias() = W.adjoint() * gy;
          col2im_add<T>(cg, dcol, grp, mview<T>(gx));
        }
      }
      if (want_x) acc.add(0, std::move(gx));
      if (want_w) acc.add(1, std::move(gw));
      if (want_b) acc.add(2, std::move(gb));
    });
  });
}

Var avg_pool1d(const Var& x, std::size_t kernel) {
  if (kernel == 0) throw ArgumentError("avg_pool1d: kernel must be positive");
  if (x.value().dim() < 1) throw ShapeError("avg_pool1d on a scalar");
  if (kernel == 1) return x;
  const Shape& in_shape = x.shape();
  const std::size_t length = in_shape.back();
  const std::size_t out_len = length / kernel;
  if (out_len == 0) throw ShapeError("avg_pool1d: length shorter than kernel");
  const std::size_t rows = x.value().numel() / length;
  Shape out_shape = in_shape;
  out_shape.back() = out_len;
  Tensor out(out_shape, x.dtype());
  const double inv = 1.0 / static_cast<double>(kernel);
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto xv = view<T>(x.value());
    auto ov = mview<T>(out);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t t = 0; t < out_len; ++t) {
        T acc{};
        for (std::size_t k = 0; k < kernel; ++k) acc += xv[r * length + t * kernel + k];
        ov[r * out_len + t] = acc * inv;
      }
    }
  });
  return Var::from_op(std::move(out), {x}, [x, rows, length, out_len, kernel, inv](
                                               const Tensor& g, GradAccumulator& acc) {
    Tensor gx(x.shape(), x.dtype());
    dispatch(x.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto gv = view<T>(g);
      auto out = mview<T>(gx);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t t = 0; t < out_len; ++t) {
          const T v = gv[r * out_len + t] * inv;
          for (std::size_t k = 0; k < kernel; ++k) out[r * length + t * kernel + k] = v;
        }
      }
    });
    acc.add(0, std::move(gx));
  });
}

// ---------------------------------------------------------------------------
// Losses

Var log_softmax(const Var& logits) {
  require_real(logits, "log_softmax");
  if (logits.value().dim() != 2) throw ShapeError("log_softmax expects [batch, classes]");
  const std::size_t n = logits.shape()[0], k = logits.shape()[1];
  Tensor out({n, k}, DType::Real64);
  const auto lv = logits.value().real_data();
  auto ov = out.real_data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = lv.data() + i * k;
    const double mx = *std::max_element(row, row + k);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(row[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < k; ++j) ov[i * k + j] = row[j] - lse;
  }
  auto result = Var::from_op(std::move(out), {logits}, {});
  if (!result.requires_grad()) return result;
  detail::Node* self = result.node();
  self->backward = [self, n, k](const Tensor& g, GradAccumulator& acc) {
    Tensor gx({n, k}, DType::Real64);
    const auto gv = g.real_data();
    const auto yv = self->value.real_data();
    auto out = gx.real_data();
    for (std::size_t i = 0; i < n; ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < k; ++j) gs += gv[i * k + j];
      for (std::size_t j = 0; j < k; ++j) {
        out[i * k + j] = gv[i * k + j] - std::exp(yv[i * k + j]) * gs;
      }
    }
    acc.add(0, std::move(gx));
  };
  return result;
}

Var cross_entropy(const Var& logits, std::span<const int> labels) {
  require_real(logits, "cross_entropy");
  if (logits.value().dim() != 2) throw ShapeError("cross_entropy expects [batch, classes]");
  const std::size_t n = logits.shape()[0], k = logits.shape()[1];
  if (labels.size() != n) throw ShapeError("cross_entropy: label count mismatch");
  if (n == 0) throw ShapeError("cross_entropy on an empty batch");
  std::vector<int> lab(labels.begin(), labels.end());
  for (int l : lab) {
    if (l < 0 || static_cast<std::size_t>(l) >= k) throw ArgumentError("cross_entropy: label out of range");
  }
  const auto lv = logits.value().real_data();
  std::vector<double> probs(n * k);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = lv.data() + i * k;
    const double mx = *std::max_element(row, row + k);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(row[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < k; ++j) probs[i * k + j] = std::exp(row[j] - lse);
    loss -= row[lab[i]] - lse;
  }
  loss /= static_cast<double>(n);
  return Var::from_op(Tensor::scalar(loss), {logits},
                      [probs = std::move(probs), lab = std::move(lab), n, k](
                          const Tensor& g, GradAccumulator& acc) {
    Tensor gx({n, k}, DType::Real64);
    auto out = gx.real_data();
    const double scale_g = g.at(0).real() / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double onehot = static_cast<int>(j) == lab[i] ? 1.0 : 0.0;
        out[i * k + j] = scale_g * (probs[i * k + j] - onehot);
      }
    }
    acc.add(0, std::move(gx));
  });
}

Var mse(const Var& prediction, const Tensor& target) {
  require_real(prediction, "mse");
  if (prediction.shape() != target.shape() || target.is_complex()) {
    throw ShapeError("mse: prediction and target must share a real shape");
  }
  Var diff = sub(prediction, Var(target));
  return mean(mul(diff, diff));
}

// ---------------------------------------------------------------------------

Var elementwise(ElementwiseOp kind, const Var& a, const Var& b) {
  auto need_b = [&] {
    if (!b.defined()) throw ArgumentError("elementwise: binary op needs a second operand");
  };
  switch (kind) {
    case ElementwiseOp::Add: need_b(); return add(a, b);
    case ElementwiseOp::Sub: need_b(); return sub(a, b);
    case ElementwiseOp::Mul: need_b(); return mul(a, b);
    case ElementwiseOp::Div: need_b(); return div(a, b);
    case ElementwiseOp::Max: need_b(); return maximum(a, b);
    case ElementwiseOp::Neg: return neg(a);
    case ElementwiseOp::Conj: return conj(a);
    case ElementwiseOp::Abs: return abs(a);
    case ElementwiseOp::Arg: return arg(a);
    case ElementwiseOp::Exp: return exp(a);
    case ElementwiseOp::Sqrt: return sqrt(a);
    case ElementwiseOp::Real: return real(a);
    case ElementwiseOp::Imag: return imag(a);
    case ElementwiseOp::Sign: return sign(a);
  }
  throw ArgumentError("elementwise: unknown op kind");
}

}  // namespace hnn
