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

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hybridnn/autodiff.hpp"

namespace hnn {

/// Activation families.
///
///   P   : alpha z + (sum_n k_n z^n) / (|z|^q + eps)
///   Ps  : alpha z + (sum_n k_n z^n) / sqrt(|z|^q + eps)
///   D   : z (1 - |alpha| + alpha sign(v))
///   E   : z (1 - |alpha| + alpha v^q / (|z|^q + eps))
///
/// with v = max(0, Re z - k1 |Im z| - k0) for D and E. RealNamed wraps the
/// standard real functions; None is the identity (only legal right before a
/// domain conversion).
enum class ActivationFamily { P, Ps, D, E, RealNamed, None };

std::string to_string(ActivationFamily family);
ActivationFamily activation_family_from_string(const std::string& name);

struct ActivationSpec {
  ActivationFamily family = ActivationFamily::None;
  int q = 0;
  cplx alpha{};
  std::array<cplx, 4> k{};  // k0..k3
  double epsilon = 0.0;
  std::string name;
};

/// Throws ConfigError for eps <= 0 (P, Ps, E), |alpha| > 1 (D, E), negative q
/// or complex k0/k1 in the thresholded families.
void validate(const ActivationSpec& spec);

/// Elementwise evaluation. Real inputs are treated as complex with zero
/// imaginary part, so the result of P/Ps/D/E is always complex.
Var activate(const ActivationSpec& spec, const Var& z);

/// ReLU, Softplus, Tanh, Abs, Tanhshrink, ELU or "none" on a real tensor.
Var activate_real(std::string_view name, const Var& x);

/// The real activation candidates used by the search.
const std::vector<std::string>& real_activation_names();

/// The eight complex presets (cRecip, cReLU, cAbs, cTanhshrink, cTanh,
/// cSoftPlus, cReImLU, cRecipMax) followed by the "none" sentinel.
std::vector<ActivationSpec> list_presets();

/// Looks up a complex preset (or "none") by its case-sensitive name.
ActivationSpec preset(std::string_view name);
bool is_complex_preset(std::string_view name);

/// Smooth ELU substitute from family P:
/// 0.373 z + z (1.513 + 0.627 z) / (|z| + 2.411).
ActivationSpec elu_surrogate();

/// Resolves any activation name (real, complex preset, "none") to a spec.
ActivationSpec activation_by_name(std::string_view name);

nlohmann::json activation_to_json(const ActivationSpec& spec);
ActivationSpec activation_from_json(const nlohmann::json& j);

}  // namespace hnn
