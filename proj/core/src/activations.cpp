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

#include "hybridnn/activations.hpp"

#include <algorithm>
#include <cmath>

#include "hybridnn/errors.hpp"
#include "hybridnn/ops.hpp"

namespace hnn {
namespace {

ActivationSpec make(std::string name, ActivationFamily family, int q, double alpha,
                    std::array<double, 4> k, double eps) {
  ActivationSpec s;
  s.name = std::move(name);
  s.family = family;
  s.q = q;
  s.alpha = alpha;
  for (std::size_t i = 0; i < 4; ++i) s.k[i] = k[i];
  s.epsilon = eps;
  return s;
}

// Table of presets; unused columns of D are stored as zero.
const std::vector<ActivationSpec>& preset_table() {
  using F = ActivationFamily;
  static const std::vector<ActivationSpec> table = {
      make("cRecip", F::P, 1, 0.0, {0, 1, 0, 0}, 0.01),
      make("cReLU", F::P, 1, 0.5, {0, 0, 0.5, 0}, 0.01),
      make("cAbs", F::P, 1, 0.0, {0, 0, 1, 0}, 0.01),
      make("cTanhshrink", F::P, 2, 0.0, {0, 0, 0, 1}, 1.0),
      make("cTanh", F::Ps, 2, 0.0, {0, 1, 0, 0}, 1.0),
      make("cSoftPlus", F::Ps, 2, 0.5, {2.134, 0, 0.5, 0}, 9.481),
      make("cReImLU", F::D, 0, 0.95, {0.1, 1, 0, 0}, 0.0),
      make("cRecipMax", F::E, 2, 0.9, {0.1, 0.5, 0, 0}, 0.1),
      make("none", F::None, 0, 0.0, {0, 0, 0, 0}, 0.0),
  };
  return table;
}

// sum_n k_n z^n with powers built by repeated multiplication.
Var polynomial(const ActivationSpec& spec, const Var& z) {
  Var acc;
  Var power = z;
  for (std::size_t n = 1; n < spec.k.size(); ++n) {
    if (n > 1) power = mul(power, z);
    if (spec.k[n] == cplx{}) continue;
    Var term = scale(power, spec.k[n]);
    acc = acc.defined() ? add(acc, term) : term;
  }
  if (spec.k[0] != cplx{}) {
    acc = acc.defined() ? add_scalar(acc, spec.k[0])
                        : Var(Tensor::full(z.shape(), spec.k[0]));
  }
  return acc.defined() ? acc : Var(Tensor(z.shape(), DType::Complex128));
}

// v = max(0, Re z - k1 |Im z| - k0)
Var threshold(const ActivationSpec& spec, const Var& z) {
  Var t = sub(real(z), scale(abs(imag(z)), spec.k[1].real()));
  t = add_scalar(t, -spec.k[0].real());
  return maximum(t, Var(Tensor(t.shape(), DType::Real64)));
}

}  // namespace

std::string to_string(ActivationFamily family) {
  switch (family) {
    case ActivationFamily::P: return "P";
    case ActivationFamily::Ps: return "Ps";
    case ActivationFamily::D: return "D";
    case ActivationFamily::E: return "E";
    case ActivationFamily::RealNamed: return "RealNamed";
    case ActivationFamily::None: return "None";
  }
  return "None";
}

ActivationFamily activation_family_from_string(const std::string& name) {
  for (auto f : {ActivationFamily::P, ActivationFamily::Ps, ActivationFamily::D,
                 ActivationFamily::E, ActivationFamily::RealNamed, ActivationFamily::None}) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown activation family '" + name + "'");
}

void validate(const ActivationSpec& spec) {
  using F = ActivationFamily;
  if (spec.q < 0) throw ConfigError("activation " + spec.name + ": q must be nonnegative");
  if ((spec.family == F::P || spec.family == F::Ps || spec.family == F::E) &&
      !(spec.epsilon > 0.0)) {
    throw ConfigError("activation " + spec.name + ": epsilon must be positive");
  }
  if ((spec.family == F::D || spec.family == F::E)) {
    if (std::abs(spec.alpha) > 1.0) {
      throw ConfigError("activation " + spec.name + ": |alpha| must not exceed 1");
    }
    if (spec.k[0].imag() != 0.0 || spec.k[1].imag() != 0.0) {
      throw ConfigError("activation " + spec.name + ": k0 and k1 must be real");
    }
  }
}

Var activate(const ActivationSpec& spec, const Var& z) {
  using F = ActivationFamily;
  if (spec.family == F::None) return z;
  if (spec.family == F::RealNamed) return activate_real(spec.name, z);
  validate(spec);
  const Var zc = to_complex(z);
  switch (spec.family) {
    case F::P:
    case F::Ps: {
      Var denom = add_scalar(powi(abs(zc), spec.q), spec.epsilon);
      if (spec.family == F::Ps) denom = sqrt(denom);
      Var out = div(polynomial(spec, zc), to_complex(denom));
      if (spec.alpha != cplx{}) out = add(scale(zc, spec.alpha), out);
      return out;
    }
    case F::D: {
      const double keep = 1.0 - std::abs(spec.alpha);
      Var factor = add_scalar(scale(to_complex(sign(threshold(spec, zc))), spec.alpha), keep);
      return mul(zc, factor);
    }
    case F::E: {
      const double keep = 1.0 - std::abs(spec.alpha);
      Var ratio = div(powi(threshold(spec, zc), spec.q),
                      add_scalar(powi(abs(zc), spec.q), spec.epsilon));
      Var factor = add_scalar(scale(to_complex(ratio), spec.alpha), keep);
      return mul(zc, factor);
    }
    default:
      break;
  }
  throw ConfigError("unsupported activation family");
}

Var activate_real(std::string_view name, const Var& x) {
  if (x.is_complex()) {
    throw ShapeError("real activation '" + std::string(name) + "' applied to a complex tensor");
  }
  if (name == "ReLU") return relu(x);
  if (name == "Softplus") return softplus(x);
  if (name == "Tanh") return tanh(x);
  if (name == "Abs") return abs(x);
  if (name == "Tanhshrink") return sub(x, tanh(x));
  if (name == "ELU") return elu(x);
  if (name == "none") return x;
  throw ConfigError("unknown real activation '" + std::string(name) + "'");
}

const std::vector<std::string>& real_activation_names() {
  static const std::vector<std::string> names = {"ReLU", "Softplus", "Tanh", "Abs",
                                                 "Tanhshrink"};
  return names;
}

std::vector<ActivationSpec> list_presets() { return preset_table(); }

ActivationSpec preset(std::string_view name) {
  for (const auto& s : preset_table()) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown activation preset '" + std::string(name) + "'");
}

bool is_complex_preset(std::string_view name) {
  return name != "none" && std::any_of(preset_table().begin(), preset_table().end(),
                                       [&](const auto& s) { return s.name == name; });
}

ActivationSpec elu_surrogate() {
  return make("ELUApprox", ActivationFamily::P, 1, 0.373, {0, 1.513, 0.627, 0}, 2.411);
}

ActivationSpec activation_by_name(std::string_view name) {
  if (name == "none") return preset("none");
  if (is_complex_preset(name)) return preset(name);
  if (name == "ELUApprox") return elu_surrogate();
  const auto& reals = real_activation_names();
  if (name == "ELU" || std::find(reals.begin(), reals.end(), name) != reals.end()) {
    ActivationSpec s;
    s.family = ActivationFamily::RealNamed;
    s.name = std::string(name);
    return s;
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

nlohmann::json activation_to_json(const ActivationSpec& spec) {
  auto c = [](cplx z) {
    return z.imag() == 0.0 ? nlohmann::json(z.real()) : nlohmann::json::array({z.real(), z.imag()});
  };
  nlohmann::json j;
  j["name"] = spec.name;
  j["family"] = to_string(spec.family);
  j["q"] = spec.q;
  j["alpha"] = c(spec.alpha);
  j["k"] = nlohmann::json::array({c(spec.k[0]), c(spec.k[1]), c(spec.k[2]), c(spec.k[3])});
  j["epsilon"] = spec.epsilon;
  return j;
}

ActivationSpec activation_from_json(const nlohmann::json& j) {
  auto c = [](const nlohmann::json& v) {
    if (v.is_array()) return cplx(v.at(0).get<double>(), v.at(1).get<double>());
    return cplx(v.get<double>(), 0.0);
  };
  try {
    ActivationSpec s;
    s.name = j.value("name", std::string{});
    s.family = activation_family_from_string(j.at("family").get<std::string>());
    s.q = j.value("q", 0);
    s.alpha = j.contains("alpha") ? c(j.at("alpha")) : cplx{};
    if (j.contains("k")) {
      const auto& k = j.at("k");
      for (std::size_t i = 0; i < std::min<std::size_t>(4, k.size()); ++i) s.k[i] = c(k.at(i));
    }
    s.epsilon = j.value("epsilon", 0.0);
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed activation spec: ") + e.what());
  }
}

}  // namespace hnn
