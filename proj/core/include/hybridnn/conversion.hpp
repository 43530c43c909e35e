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

#include <string>
#include <vector>

#include <json.hpp>

#include "hybridnn/autodiff.hpp"

namespace hnn {

enum class ConversionDirection { R2C, C2R };

enum class ConversionKind {
  Real,
  Exp,
  Sqrt,
  MagExp,
  Cartesian,
  Polar,
  Rotation,
  Mag,
  SquareMag,
  AbsPhase,
  MagAbsPhase,
  MultiMagReal,
  MultiMagPhase,
};

std::string to_string(ConversionDirection direction);
std::string to_string(ConversionKind kind);
ConversionDirection conversion_direction_from_string(const std::string& name);
ConversionKind conversion_kind_from_string(const std::string& name);

/// A fixed real<->complex map. Channels are grouped in consecutive blocks:
/// R2C consumes in_arity() adjacent real channels per complex channel, C2R
/// emits out_arity() adjacent real channels per complex channel. The channel
/// axis is 1 (axis 0 for rank-1 tensors).
struct ConversionSpec {
  ConversionDirection direction = ConversionDirection::C2R;
  ConversionKind kind = ConversionKind::Mag;
  int n_phases = 3;

  std::size_t in_arity() const;
  std::size_t out_arity() const;
  bool is_lossless() const;
  /// Throws ConfigError if the kind does not exist in this direction or
  /// n_phases < 1.
  void validate() const;
  std::string name() const;

  bool operator==(const ConversionSpec&) const = default;
};

ConversionSpec r2c_spec(ConversionKind kind);
ConversionSpec c2r_spec(ConversionKind kind, int n_phases = 3);

/// Parses a kind name for the given direction.
ConversionSpec conversion_from_string(ConversionDirection direction, const std::string& kind,
                                      int n_phases = 3);

/// All sixteen conversions (seven R2C, nine C2R), with n_phases = 3.
std::vector<ConversionSpec> all_conversions();
std::vector<ConversionKind> kinds_for(ConversionDirection direction);

std::size_t channel_axis(std::size_t rank);

/// Number of output channels produced from `channels` input channels.
std::size_t converted_channels(const ConversionSpec& spec, std::size_t channels);

Var r2c(const ConversionSpec& spec, const Var& x);
Var c2r(const ConversionSpec& spec, const Var& z);
/// Dispatches on spec.direction.
Var convert(const ConversionSpec& spec, const Var& x);

/// Reconstructs z from the output of a lossless C2R conversion.
Tensor invert_lossless(const ConversionSpec& spec, const Tensor& y);

nlohmann::json conversion_to_json(const ConversionSpec& spec);
ConversionSpec conversion_from_json(const nlohmann::json& j);

}  // namespace hnn
