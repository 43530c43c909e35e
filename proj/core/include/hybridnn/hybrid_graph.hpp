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
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hybridnn/activations.hpp"
#include "hybridnn/conversion.hpp"
#include "hybridnn/layers.hpp"

namespace hnn {

/// The four paths of a hybrid block: source domain then destination domain.
enum class PathKind { RR, RC, CR, CC };
inline constexpr std::array<PathKind, 4> kAllPaths = {PathKind::RR, PathKind::RC, PathKind::CR,
                                                      PathKind::CC};

std::string to_string(PathKind kind);
PathKind path_kind_from_string(const std::string& name);
Domain source_domain(PathKind kind);
Domain target_domain(PathKind kind);
inline bool is_cross(PathKind kind) { return kind == PathKind::RC || kind == PathKind::CR; }

enum class IoDomain { Real, Complex, Both };
std::string to_string(IoDomain domain);
IoDomain io_domain_from_string(const std::string& name);
inline bool has_real(IoDomain d) { return d != IoDomain::Complex; }
inline bool has_complex(IoDomain d) { return d != IoDomain::Real; }

/// One path: conv (in the source domain) -> activation -> optional norm and
/// dropout -> conversion to the target domain (cross paths only).
struct PathSpec {
  std::size_t channels = 8;  // conv output channels (c)
  std::size_t kernel = 3;    // k
  std::size_t groups = 1;    // n
  std::string activation = "none";
  std::optional<ConversionSpec> conversion;
  bool norm = false;
  double dropout = 0.0;

  bool operator==(const PathSpec&) const = default;
};

/// Up to four paths. Outputs concatenate along channels in the order
/// real = [RR, CR], complex = [RC, CC], then average-pool by `pool` when > 1.
struct BlockSpec {
  std::array<std::optional<PathSpec>, 4> paths;
  std::size_t pool = 1;

  std::optional<PathSpec>& path(PathKind kind) { return paths[static_cast<std::size_t>(kind)]; }
  const std::optional<PathSpec>& path(PathKind kind) const {
    return paths[static_cast<std::size_t>(kind)];
  }
  bool empty() const;
  bool operator==(const BlockSpec&) const = default;
};

struct HeadSpec {
  bool real = true;
  bool complex = true;
  std::size_t classes = 10;
  /// Maps complex logits to real ones; must emit one value per class.
  ConversionSpec conversion{ConversionDirection::C2R, ConversionKind::Mag, 3};

  bool operator==(const HeadSpec&) const = default;
};

/// Series network: optional input adapter, blocks, mean-over-length heads.
/// Inputs are [batch, channels, length]. When both heads are present their
/// logits are summed.
struct NetworkSpec {
  IoDomain input = IoDomain::Complex;
  std::size_t real_channels = 0;
  std::size_t complex_channels = 0;
  /// C2R builds the real input from the complex one, R2C the reverse.
  std::optional<ConversionSpec> adapter;
  std::vector<BlockSpec> blocks;
  HeadSpec heads;

  bool operator==(const NetworkSpec&) const = default;
};

/// Channel counts seen at each block boundary (0 = domain absent).
struct BlockShape {
  std::size_t real_in = 0;
  std::size_t complex_in = 0;
  std::size_t real_out = 0;
  std::size_t complex_out = 0;
};

/// Channels available to the first block after the adapter.
std::pair<std::size_t, std::size_t> first_block_channels(const NetworkSpec& spec);
std::vector<BlockShape> infer_shapes(const NetworkSpec& spec);

/// Static checks: activation names per path domain, "none" only on cross
/// paths, conversions present exactly on cross paths, arity divisibility,
/// group divisibility, head conversion arity. Throws ConfigError.
void validate(const NetworkSpec& spec);

/// Removes every path, adapter and head that is not on a route from an
/// available input to a required head. Throws ConfigError naming the head
/// when a required output becomes unreachable.
NetworkSpec prune_dependencies(NetworkSpec spec);

enum class AdaptMode { InsertConversion, RemovePorts };
std::string to_string(AdaptMode mode);
AdaptMode adapt_mode_from_string(const std::string& name);

struct AdaptOptions {
  AdaptMode mode = AdaptMode::InsertConversion;
  ConversionSpec c2r{ConversionDirection::C2R, ConversionKind::Cartesian, 3};
  ConversionSpec r2c{ConversionDirection::R2C, ConversionKind::Real, 3};
};

/// Matches the network to the available input domain and the required
/// output domain, then prunes.
NetworkSpec adapt_io(NetworkSpec spec, IoDomain input, IoDomain output,
                     const AdaptOptions& options = {});

nlohmann::json network_spec_to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const nlohmann::json& j);

struct NetworkInput {
  std::optional<Var> real;
  std::optional<Var> complex;
};

struct BlockOutput {
  std::optional<Var> real;
  std::optional<Var> complex;
};

/// Instantiated path with its parameters.
struct PathModule {
  PathKind kind;
  PathSpec spec;
  ConvLayer conv;
  ActivationSpec activation;
  std::optional<Bamn> norm;
};

struct BlockModule {
  std::vector<PathModule> paths;
  std::size_t pool = 1;
};

/// Evaluates one block. `dropout_rng` may be null when not training.
BlockOutput block_forward(BlockModule& block, const std::optional<Var>& real_in,
                          const std::optional<Var>& complex_in, bool training,
                          Rng* dropout_rng = nullptr);

class Network {
 public:
  /// Validates `spec` and draws all weights from `seed`.
  Network(NetworkSpec spec, std::uint64_t seed);

  /// Returns real logits [batch, classes].
  Var forward(const NetworkInput& input, bool training = false, Rng* dropout_rng = nullptr);

  std::vector<Var> parameters() const;
  ParamCount count_parameters() const;
  const NetworkSpec& spec() const { return spec_; }
  std::vector<BlockModule>& blocks() { return blocks_; }

  nlohmann::json checkpoint() const;
  static Network from_checkpoint(const nlohmann::json& j);

 private:
  NetworkSpec spec_;
  std::vector<BlockModule> blocks_;
  std::optional<LinearLayer> real_head_;
  std::optional<LinearLayer> complex_head_;
};

/// Exact parameter count of the instantiated network.
ParamCount count_parameters(const NetworkSpec& spec);

/// Fully connected prototype: every block gets all four paths.
struct PrototypeOptions {
  std::size_t blocks = 2;
  std::size_t channels = 8;
  std::size_t kernel = 3;
  /// Kernel of the first block; 0 means `kernel`.
  std::size_t first_kernel = 0;
  std::string real_activation = "ReLU";
  std::string complex_activation = "cTanh";
  ConversionSpec r2c{ConversionDirection::R2C, ConversionKind::Cartesian, 3};
  ConversionSpec c2r{ConversionDirection::C2R, ConversionKind::Cartesian, 3};
};
NetworkSpec make_prototype(IoDomain input, std::size_t real_channels,
                           std::size_t complex_channels, std::size_t classes,
                           const PrototypeOptions& options = {});

}  // namespace hnn
