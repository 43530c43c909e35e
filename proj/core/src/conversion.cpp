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

#include "hybridnn/conversion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hybridnn/errors.hpp"
#include "hybridnn/ops.hpp"

namespace hnn {
namespace {

constexpr double kPi = std::numbers::pi;

struct KindName {
  ConversionKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ConversionKind::Real, "Real"},
    {ConversionKind::Exp, "Exp"},
    {ConversionKind::Sqrt, "Sqrt"},
    {ConversionKind::MagExp, "MagExp"},
    {ConversionKind::Cartesian, "Cartesian"},
    {ConversionKind::Polar, "Polar"},
    {ConversionKind::Rotation, "Rotation"},
    {ConversionKind::Mag, "Mag"},
    {ConversionKind::SquareMag, "SquareMag"},
    {ConversionKind::AbsPhase, "AbsPhase"},
    {ConversionKind::MagAbsPhase, "MagAbsPhase"},
    {ConversionKind::MultiMagReal, "MultiMagReal"},
    {ConversionKind::MultiMagPhase, "MultiMagPhase"},
};

const std::vector<ConversionKind> kR2CKinds = {
    ConversionKind::Real,      ConversionKind::Exp,   ConversionKind::Sqrt,
    ConversionKind::MagExp,    ConversionKind::Cartesian, ConversionKind::Polar,
    ConversionKind::Rotation};

const std::vector<ConversionKind> kC2RKinds = {
    ConversionKind::Real,         ConversionKind::Mag,          ConversionKind::SquareMag,
    ConversionKind::AbsPhase,     ConversionKind::MagAbsPhase,  ConversionKind::Cartesian,
    ConversionKind::Polar,        ConversionKind::MultiMagReal, ConversionKind::MultiMagPhase};

// e^{i pi x} for real x.
Var unit_phase(const Var& x) { return exp(scale(to_complex(x), cplx(0.0, kPi))); }

// Splits the channel axis into [groups, arity] and returns each member.
std::vector<Var> split_groups(const Var& x, std::size_t arity) {
  const Shape& s = x.shape();
  const std::size_t ax = channel_axis(s.size());
  if (s[ax] % arity != 0) {
    throw ShapeError("conversion expects a channel count divisible by " + std::to_string(arity) +
                     ", got " + std::to_string(s[ax]));
  }
  if (arity == 1) return {x};
  Shape grouped(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(ax));
  grouped.push_back(s[ax] / arity);
  grouped.push_back(arity);
  grouped.insert(grouped.end(), s.begin() + static_cast<std::ptrdiff_t>(ax) + 1, s.end());
  Var g = reshape(x, grouped);
  std::vector<Var> parts;
  for (std::size_t j = 0; j < arity; ++j) parts.push_back(select(g, ax + 1, j));
  return parts;
}

// Interleaves per-channel outputs back into consecutive channel blocks.
Var merge_groups(const std::vector<Var>& parts) {
  if (parts.size() == 1) return parts.front();
  const Shape s = parts.front().shape();
  const std::size_t ax = channel_axis(s.size());
  Var stacked = stack(parts, ax + 1);
  Shape merged = s;
  merged[ax] *= parts.size();
  return reshape(stacked, merged);
}

cplx phase_rotor(int n, int n_phases) {
  return std::polar(1.0, -2.0 * kPi * n / n_phases);
}

void require_rank(const Shape& s) {
  if (s.empty()) throw ShapeError("conversion requires a tensor of rank >= 1");
}

}  // namespace

std::string to_string(ConversionDirection direction) {
  return direction == ConversionDirection::R2C ? "R2C" : "C2R";
}

std::string to_string(ConversionKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "?";
}

ConversionDirection conversion_direction_from_string(const std::string& name) {
  if (name == "R2C") return ConversionDirection::R2C;
  if (name == "C2R") return ConversionDirection::C2R;
  throw ConfigError("unknown conversion direction '" + name + "'");
}

ConversionKind conversion_kind_from_string(const std::string& name) {
  for (const auto& kn : kKindNames) {
    if (name == kn.name) return kn.kind;
  }
  throw ConfigError("unknown conversion kind '" + name + "'");
}

std::vector<ConversionKind> kinds_for(ConversionDirection direction) {
  return direction == ConversionDirection::R2C ? kR2CKinds : kC2RKinds;
}

std::size_t ConversionSpec::in_arity() const {
  if (direction == ConversionDirection::C2R) return 1;
  switch (kind) {
    case ConversionKind::Cartesian:
    case ConversionKind::Polar: return 2;
    case ConversionKind::Rotation: return 3;
    default: return 1;
  }
}

std::size_t ConversionSpec::out_arity() const {
  if (direction == ConversionDirection::R2C) return 1;
  switch (kind) {
    case ConversionKind::MagAbsPhase:
    case ConversionKind::Cartesian:
    case ConversionKind::Polar: return 2;
    case ConversionKind::MultiMagReal:
    case ConversionKind::MultiMagPhase: return static_cast<std::size_t>(n_phases);
    default: return 1;
  }
}

bool ConversionSpec::is_lossless() const {
  if (direction != ConversionDirection::C2R) return false;
  switch (kind) {
    case ConversionKind::Cartesian:
    case ConversionKind::Polar: return true;
    case ConversionKind::MultiMagReal:
    case ConversionKind::MultiMagPhase: return n_phases >= 3;
    default: return false;
  }
}

void ConversionSpec::validate() const {
  const auto kinds = kinds_for(direction);
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    throw ConfigError("conversion kind " + to_string(kind) + " is not available for " +
                      to_string(direction));
  }
  if (n_phases < 1) throw ConfigError("n_phases must be at least 1");
}

std::string ConversionSpec::name() const {
  std::string out = to_string(direction) + ":" + to_string(kind);
  if (kind == ConversionKind::MultiMagReal || kind == ConversionKind::MultiMagPhase) {
    out += "(" + std::to_string(n_phases) + ")";
  }
  return out;
}

ConversionSpec r2c_spec(ConversionKind kind) {
  ConversionSpec s{ConversionDirection::R2C, kind, 3};
  s.validate();
  return s;
}

ConversionSpec c2r_spec(ConversionKind kind, int n_phases) {
  ConversionSpec s{ConversionDirection::C2R, kind, n_phases};
  s.validate();
  return s;
}

ConversionSpec conversion_from_string(ConversionDirection direction, const std::string& kind,
                                      int n_phases) {
  ConversionSpec s{direction, conversion_kind_from_string(kind), n_phases};
  s.validate();
  return s;
}

std::vector<ConversionSpec> all_conversions() {
  std::vector<ConversionSpec> out;
  for (auto k : kR2CKinds) out.push_back(r2c_spec(k));
  for (auto k : kC2RKinds) out.push_back(c2r_spec(k));
  return out;
}

std::size_t channel_axis(std::size_t rank) { return rank >= 2 ? 1 : 0; }

std::size_t converted_channels(const ConversionSpec& spec, std::size_t channels) {
  if (channels % spec.in_arity() != 0) {
    throw ShapeError("channel count " + std::to_string(channels) + " not divisible by " +
                     std::to_string(spec.in_arity()) + " for " + spec.name());
  }
  return channels / spec.in_arity() * spec.out_arity();
}

Var r2c(const ConversionSpec& spec, const Var& x) {
  spec.validate();
  if (spec.direction != ConversionDirection::R2C) throw ConfigError(spec.name() + " is not R2C");
  if (x.is_complex()) throw ShapeError("R2C conversion expects a real tensor");
  require_rank(x.shape());
  const auto in = split_groups(x, spec.in_arity());
  switch (spec.kind) {
    case ConversionKind::Real: return to_complex(in[0]);
    case ConversionKind::Exp: return unit_phase(in[0]);
    case ConversionKind::Sqrt: return sqrt(to_complex(in[0]));
    case ConversionKind::MagExp: return mul(to_complex(abs(in[0])), unit_phase(in[0]));
    case ConversionKind::Cartesian: return make_complex(in[0], in[1]);
    case ConversionKind::Polar: return mul(to_complex(in[0]), unit_phase(in[1]));
    case ConversionKind::Rotation: return mul(make_complex(in[0], in[1]), unit_phase(in[2]));
    default: break;
  }
  throw ConfigError("unsupported R2C kind " + to_string(spec.kind));
}

Var c2r(const ConversionSpec& spec, const Var& z) {
  spec.validate();
  if (spec.direction != ConversionDirection::C2R) throw ConfigError(spec.name() + " is not C2R");
  if (!z.is_complex()) throw ShapeError("C2R conversion expects a complex tensor");
  require_rank(z.shape());
  switch (spec.kind) {
    case ConversionKind::Real: return real(z);
    case ConversionKind::Mag: return abs(z);
    case ConversionKind::SquareMag: {
      Var m = abs(z);
      return mul(m, m);
    }
    case ConversionKind::AbsPhase: return scale(abs(arg(z)), 1.0 / kPi);
    case ConversionKind::MagAbsPhase:
      return merge_groups({abs(z), scale(abs(arg(z)), 1.0 / kPi)});
    case ConversionKind::Cartesian: return merge_groups({real(z), imag(z)});
    case ConversionKind::Polar: return merge_groups({abs(z), scale(arg(z), 1.0 / kPi)});
    case ConversionKind::MultiMagReal: {
      Var m = abs(z);
      std::vector<Var> parts;
      for (int n = 0; n < spec.n_phases; ++n) {
        parts.push_back(scale(add(m, real(scale(z, phase_rotor(n, spec.n_phases)))), 0.5));
      }
      return merge_groups(parts);
    }
    case ConversionKind::MultiMagPhase: {
      Var m = abs(z);
      std::vector<Var> parts;
      for (int n = 0; n < spec.n_phases; ++n) {
        Var ph = abs(arg(scale(z, phase_rotor(n, spec.n_phases))));
        parts.push_back(scale(mul(m, ph), 1.0 / kPi));
      }
      return merge_groups(parts);
    }
    default: break;
  }
  throw ConfigError("unsupported C2R kind " + to_string(spec.kind));
}

Var convert(const ConversionSpec& spec, const Var& x) {
  return spec.direction == ConversionDirection::R2C ? r2c(spec, x) : c2r(spec, x);
}

Tensor invert_lossless(const ConversionSpec& spec, const Tensor& y) {
  spec.validate();
  const bool supported = spec.direction == ConversionDirection::C2R &&
                         (spec.kind == ConversionKind::Cartesian ||
                          spec.kind == ConversionKind::Polar ||
                          (spec.kind == ConversionKind::MultiMagReal && spec.n_phases >= 3));
  if (!supported) throw ArgumentError(spec.name() + " has no inverse");
  if (y.is_complex()) throw ShapeError("inverse conversion expects a real tensor");
  require_rank(y.shape());
  const auto parts = split_groups(Var(y), spec.out_arity());
  const std::size_t n = parts.front().value().numel();
  std::vector<std::span<const double>> p;
  for (const auto& v : parts) p.push_back(v.value().real_data());
  std::vector<cplx> out(n);
  const auto np = static_cast<std::size_t>(spec.n_phases);
  for (std::size_t i = 0; i < n; ++i) {
    switch (spec.kind) {
      case ConversionKind::Cartesian: out[i] = {p[0][i], p[1][i]}; break;
      case ConversionKind::Polar: out[i] = std::polar(p[0][i], kPi * p[1][i]); break;
      default: {
        double total = 0.0;
        for (std::size_t k = 0; k < np; ++k) total += p[k][i];
        const double mag = 2.0 * total / static_cast<double>(np);
        double re = 0.0, im = 0.0;
        for (std::size_t k = 0; k < np; ++k) {
          const double theta = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(np);
          const double proj = 2.0 * p[k][i] - mag;
          re += proj * std::cos(theta);
          im += proj * std::sin(theta);
        }
        out[i] = {2.0 * re / static_cast<double>(np), 2.0 * im / static_cast<double>(np)};
      }
    }
  }
  return Tensor::complex(parts.front().shape(), std::move(out));
}

nlohmann::json conversion_to_json(const ConversionSpec& spec) {
  return {{"direction", to_string(spec.direction)},
          {"kind", to_string(spec.kind)},
          {"n_phases", spec.n_phases}};
}

ConversionSpec conversion_from_json(const nlohmann::json& j) {
  try {
    ConversionSpec s{conversion_direction_from_string(j.at("direction").get<std::string>()),
                     conversion_kind_from_string(j.at("kind").get<std::string>()),
                     j.value("n_phases", 3)};
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed conversion spec: ") + e.what());
  }
}

}  // namespace hnn
