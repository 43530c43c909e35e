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

#include "hybridnn/hybrid_graph.hpp"

#include <algorithm>

#include "hybridnn/errors.hpp"
#include "hybridnn/ops.hpp"

namespace hnn {
namespace {

bool is_real_activation(const std::string& name) {
  const auto& names = real_activation_names();
  return name == "ELU" || std::find(names.begin(), names.end(), name) != names.end();
}

bool is_complex_activation(const std::string& name) {
  return is_complex_preset(name) || name == "ELUApprox";
}

std::string where(std::size_t block, PathKind kind) {
  return "block " + std::to_string(block) + " path " + to_string(kind);
}

std::size_t path_out_channels(PathKind kind, const PathSpec& p) {
  if (!is_cross(kind) || !p.conversion) return p.channels;
  return converted_channels(*p.conversion, p.channels);
}

// Domains flowing into block 0 (or straight into the heads).
std::pair<bool, bool> input_domains(const NetworkSpec& spec) {
  bool r = has_real(spec.input);
  bool c = has_complex(spec.input);
  if (spec.adapter) {
    if (spec.adapter->direction == ConversionDirection::C2R && has_complex(spec.input)) r = true;
    if (spec.adapter->direction == ConversionDirection::R2C && has_real(spec.input)) c = true;
  }
  return {r, c};
}

Var mean_over_length(const Var& x) {
  const Shape& s = x.shape();
  if (s.size() != 3) throw ShapeError("head expects [batch, channels, length]");
  return reshape(mean_axes(x, {2}), {s[0], s[1]});
}

nlohmann::json path_to_json(PathKind kind, const PathSpec& p) {
  nlohmann::json j;
  j["conv"] = {{"c", p.channels}, {"k", p.kernel}, {"n", p.groups}};
  j["activation"] = p.activation;
  if (is_cross(kind) && p.conversion) {
    j["conversion"] = to_string(p.conversion->kind);
    j["n_phases"] = p.conversion->n_phases;
  }
  j["optional"] = {{"norm", p.norm}, {"dropout", p.dropout}};
  return j;
}

PathSpec path_from_json(PathKind kind, const nlohmann::json& j) {
  PathSpec p;
  const auto& conv = j.at("conv");
  p.channels = conv.at("c").get<std::size_t>();
  p.kernel = conv.value("k", std::size_t{1});
  p.groups = conv.value("n", conv.value("groups", std::size_t{1}));
  p.activation = j.value("activation", std::string("none"));
  if (j.contains("conversion") && !j.at("conversion").is_null()) {
    const auto dir = kind == PathKind::RC ? ConversionDirection::R2C : ConversionDirection::C2R;
    p.conversion = conversion_from_string(dir, j.at("conversion").get<std::string>(),
                                          j.value("n_phases", 3));
  }
  if (j.contains("optional")) {
    const auto& o = j.at("optional");
    p.norm = o.value("norm", false);
    p.dropout = o.value("dropout", 0.0);
  }
  return p;
}

}  // namespace

std::string to_string(PathKind kind) {
  switch (kind) {
    case PathKind::RR: return "RR";
    case PathKind::RC: return "RC";
    case PathKind::CR: return "CR";
    case PathKind::CC: return "CC";
  }
  return "?";
}

PathKind path_kind_from_string(const std::string& name) {
  for (auto k : kAllPaths) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown path '" + name + "'");
}

Domain source_domain(PathKind kind) {
  return kind == PathKind::RR || kind == PathKind::RC ? Domain::Real : Domain::Complex;
}

Domain target_domain(PathKind kind) {
  return kind == PathKind::RR || kind == PathKind::CR ? Domain::Real : Domain::Complex;
}

std::string to_string(IoDomain domain) {
  switch (domain) {
    case IoDomain::Real: return "real";
    case IoDomain::Complex: return "complex";
    case IoDomain::Both: return "both";
  }
  return "?";
}

IoDomain io_domain_from_string(const std::string& name) {
  if (name == "real") return IoDomain::Real;
  if (name == "complex") return IoDomain::Complex;
  if (name == "both") return IoDomain::Both;
  throw ConfigError("unknown domain '" + name + "'");
}

std::string to_string(AdaptMode mode) {
  return mode == AdaptMode::InsertConversion ? "insert-conversion" : "remove-ports";
}

AdaptMode adapt_mode_from_string(const std::string& name) {
  if (name == "insert-conversion") return AdaptMode::InsertConversion;
  if (name == "remove-ports") return AdaptMode::RemovePorts;
  throw ConfigError("unknown adapt mode '" + name + "'");
}

bool BlockSpec::empty() const {
  return std::none_of(paths.begin(), paths.end(), [](const auto& p) { return p.has_value(); });
}

std::pair<std::size_t, std::size_t> first_block_channels(const NetworkSpec& spec) {
  std::size_t r = has_real(spec.input) ? spec.real_channels : 0;
  std::size_t c = has_complex(spec.input) ? spec.complex_channels : 0;
  if (spec.adapter) {
    if (spec.adapter->direction == ConversionDirection::C2R) {
      r += converted_channels(*spec.adapter, c);
    } else {
      c += converted_channels(*spec.adapter, r);
    }
  }
  return {r, c};
}

std::vector<BlockShape> infer_shapes(const NetworkSpec& spec) {
  std::vector<BlockShape> shapes;
  auto [r, c] = first_block_channels(spec);
  for (const auto& block : spec.blocks) {
    BlockShape s{r, c, 0, 0};
    for (auto k : kAllPaths) {
      const auto& p = block.path(k);
      if (!p) continue;
      const std::size_t out = path_out_channels(k, *p);
      (target_domain(k) == Domain::Real ? s.real_out : s.complex_out) += out;
    }
    shapes.push_back(s);
    r = s.real_out;
    c = s.complex_out;
  }
  return shapes;
}

void validate(const NetworkSpec& spec) {
  if (has_real(spec.input) && spec.real_channels == 0) {
    throw ConfigError("real input declared with zero channels");
  }
  if (has_complex(spec.input) && spec.complex_channels == 0) {
    throw ConfigError("complex input declared with zero channels");
  }
  if (spec.adapter) {
    spec.adapter->validate();
    const bool ok = spec.adapter->direction == ConversionDirection::C2R ? has_complex(spec.input)
                                                                         : has_real(spec.input);
    if (!ok) throw ConfigError("input adapter " + spec.adapter->name() + " has no source");
    const std::size_t src = spec.adapter->direction == ConversionDirection::C2R
                                ? spec.complex_channels
                                : spec.real_channels;
    if (src % spec.adapter->in_arity() != 0) {
      throw ConfigError("input adapter arity does not divide the input channels");
    }
  }
  if (!spec.heads.real && !spec.heads.complex) throw ConfigError("network has no output head");
  if (spec.heads.classes == 0) throw ConfigError("head needs at least one class");
  spec.heads.conversion.validate();
  if (spec.heads.conversion.direction != ConversionDirection::C2R ||
      spec.heads.conversion.out_arity() != 1) {
    throw ConfigError("head conversion must be a single-output C2R kind");
  }

  auto [r, c] = first_block_channels(spec);
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    const auto& block = spec.blocks[b];
    if (block.empty()) throw ConfigError("block " + std::to_string(b) + " has no paths");
    if (block.pool == 0) throw ConfigError("block " + std::to_string(b) + " has pool 0");
    std::size_t r_out = 0, c_out = 0;
    for (auto k : kAllPaths) {
      const auto& p = block.path(k);
      if (!p) continue;
      const std::string at = where(b, k);
      const std::size_t in = source_domain(k) == Domain::Real ? r : c;
      if (in == 0) {
        throw ConfigError(at + " consumes " + to_string(source_domain(k)) +
                          " input that is not available");
      }
      if (p->channels == 0 || p->kernel == 0 || p->groups == 0) {
        throw ConfigError(at + ": channels, kernel and groups must be positive");
      }
      if (in % p->groups != 0 || p->channels % p->groups != 0) {
        throw ConfigError(at + ": groups must divide input and output channels");
      }
      if (!(p->dropout >= 0.0 && p->dropout < 1.0)) {
        throw ConfigError(at + ": dropout must lie in [0, 1)");
      }
      const bool real_src = source_domain(k) == Domain::Real;
      if (p->activation == "none") {
        if (!is_cross(k)) throw ConfigError(at + ": \"none\" activation needs a conversion after it");
      } else if (real_src ? !is_real_activation(p->activation)
                          : !is_complex_activation(p->activation)) {
        throw ConfigError(at + ": activation '" + p->activation + "' does not fit the " +
                          to_string(source_domain(k)) + " domain");
      }
      if (is_cross(k)) {
        if (!p->conversion) throw ConfigError(at + ": cross path needs a conversion");
        p->conversion->validate();
        const auto want = k == PathKind::RC ? ConversionDirection::R2C : ConversionDirection::C2R;
        if (p->conversion->direction != want) {
          throw ConfigError(at + ": conversion direction must be " + to_string(want));
        }
        if (p->channels % p->conversion->in_arity() != 0) {
          throw ConfigError(at + ": channels not divisible by the conversion arity");
        }
      } else if (p->conversion) {
        throw ConfigError(at + ": same-domain path cannot carry a conversion");
      }
      (target_domain(k) == Domain::Real ? r_out : c_out) += path_out_channels(k, *p);
    }
    r = r_out;
    c = c_out;
  }
  if (spec.heads.real && r == 0) throw ConfigError("real output head has no real features");
  if (spec.heads.complex && c == 0) {
    throw ConfigError("complex output head has no complex features");
  }
}

NetworkSpec prune_dependencies(NetworkSpec spec) {
  const std::size_t nb = spec.blocks.size();
  const auto [in_real, in_complex] = input_domains(spec);
  bool changed = true;
  while (changed) {
    changed = false;
    // Forward: drop paths whose source domain never arrives.
    bool r = in_real, c = in_complex;
    for (auto& block : spec.blocks) {
      for (auto k : kAllPaths) {
        auto& p = block.path(k);
        if (p && !(source_domain(k) == Domain::Real ? r : c)) {
          p.reset();
          changed = true;
        }
      }
      r = block.path(PathKind::RR) || block.path(PathKind::CR);
      c = block.path(PathKind::RC) || block.path(PathKind::CC);
    }
    // Backward: drop paths whose output nobody consumes.
    bool need_r = spec.heads.real, need_c = spec.heads.complex;
    for (std::size_t b = nb; b-- > 0;) {
      auto& block = spec.blocks[b];
      for (auto k : kAllPaths) {
        auto& p = block.path(k);
        if (p && !(target_domain(k) == Domain::Real ? need_r : need_c)) {
          p.reset();
          changed = true;
        }
      }
      need_r = block.path(PathKind::RR) || block.path(PathKind::RC);
      need_c = block.path(PathKind::CR) || block.path(PathKind::CC);
    }
  }

  bool r = in_real, c = in_complex;
  for (const auto& block : spec.blocks) {
    r = block.path(PathKind::RR) || block.path(PathKind::CR);
    c = block.path(PathKind::RC) || block.path(PathKind::CC);
  }
  if (spec.heads.real && !r) throw ConfigError("real output head is unreachable");
  if (spec.heads.complex && !c) throw ConfigError("complex output head is unreachable");

  if (spec.adapter) {
    bool need_r = spec.heads.real, need_c = spec.heads.complex;
    if (nb > 0) {
      const auto& b0 = spec.blocks.front();
      need_r = b0.path(PathKind::RR) || b0.path(PathKind::RC);
      need_c = b0.path(PathKind::CR) || b0.path(PathKind::CC);
    }
    const bool makes_real = spec.adapter->direction == ConversionDirection::C2R;
    if (makes_real ? !need_r : !need_c) spec.adapter.reset();
  }
  return spec;
}

NetworkSpec adapt_io(NetworkSpec spec, IoDomain input, IoDomain output,
                     const AdaptOptions& options) {
  spec.input = input;
  if (input == IoDomain::Both) {
    spec.adapter.reset();
  } else {
    const bool missing_real = input == IoDomain::Complex;
    bool wanted;
    if (spec.blocks.empty()) {
      wanted = missing_real ? spec.heads.real : spec.heads.complex;
    } else {
      const auto& b0 = spec.blocks.front();
      wanted = missing_real ? (b0.path(PathKind::RR) || b0.path(PathKind::RC))
                            : (b0.path(PathKind::CR) || b0.path(PathKind::CC));
    }
    const auto dir = missing_real ? ConversionDirection::C2R : ConversionDirection::R2C;
    if (spec.adapter && spec.adapter->direction != dir) spec.adapter.reset();
    if (wanted && options.mode == AdaptMode::InsertConversion) {
      if (!spec.adapter) spec.adapter = missing_real ? options.c2r : options.r2c;
    } else {
      spec.adapter.reset();
      if (wanted && !spec.blocks.empty()) {
        auto& b0 = spec.blocks.front();
        b0.path(missing_real ? PathKind::RR : PathKind::CR).reset();
        b0.path(missing_real ? PathKind::RC : PathKind::CC).reset();
      }
    }
  }
  if (output == IoDomain::Real) spec.heads.complex = false;
  if (output == IoDomain::Complex) spec.heads.real = false;
  return prune_dependencies(std::move(spec));
}

nlohmann::json network_spec_to_json(const NetworkSpec& spec) {
  nlohmann::json j;
  j["input"] = {{"domain", to_string(spec.input)},
                {"real_channels", spec.real_channels},
                {"complex_channels", spec.complex_channels}};
  j["adapter"] = spec.adapter ? conversion_to_json(*spec.adapter) : nlohmann::json(nullptr);
  j["heads"] = {{"real", spec.heads.real},
                {"complex", spec.heads.complex},
                {"classes", spec.heads.classes},
                {"conversion", to_string(spec.heads.conversion.kind)}};
  j["blocks"] = nlohmann::json::array();
  for (const auto& block : spec.blocks) {
    nlohmann::json jb;
    jb["pool"] = block.pool;
    jb["paths"] = nlohmann::json::object();
    for (auto k : kAllPaths) {
      if (const auto& p = block.path(k)) jb["paths"][to_string(k)] = path_to_json(k, *p);
    }
    j["blocks"].push_back(jb);
  }
  return j;
}

NetworkSpec network_spec_from_json(const nlohmann::json& j) {
  try {
    NetworkSpec spec;
    const auto& in = j.at("input");
    spec.input = io_domain_from_string(in.at("domain").get<std::string>());
    spec.real_channels = in.value("real_channels", std::size_t{0});
    spec.complex_channels = in.value("complex_channels", std::size_t{0});
    if (j.contains("adapter") && !j.at("adapter").is_null()) {
      spec.adapter = conversion_from_json(j.at("adapter"));
    }
    if (j.contains("heads")) {
      const auto& h = j.at("heads");
      spec.heads.real = h.value("real", true);
      spec.heads.complex = h.value("complex", true);
      spec.heads.classes = h.value("classes", std::size_t{10});
      spec.heads.conversion = conversion_from_string(ConversionDirection::C2R,
                                                     h.value("conversion", std::string("Mag")));
    }
    for (const auto& jb : j.at("blocks")) {
      BlockSpec block;
      block.pool = jb.value("pool", std::size_t{1});
      for (const auto& [name, jp] : jb.at("paths").items()) {
        const PathKind k = path_kind_from_string(name);
        block.path(k) = path_from_json(k, jp);
      }
      spec.blocks.push_back(std::move(block));
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed architecture: ") + e.what());
  }
}

BlockOutput block_forward(BlockModule& block, const std::optional<Var>& real_in,
                          const std::optional<Var>& complex_in, bool training,
                          Rng* dropout_rng) {
  if (block.paths.empty()) throw ConfigError("block has no live paths");
  std::vector<Var> real_parts, complex_parts;
  // Paths are stored in RR, RC, CR, CC order, which yields the concat order
  // real = [RR, CR] and complex = [RC, CC].
  for (auto& path : block.paths) {
    const bool real_src = source_domain(path.kind) == Domain::Real;
    const auto& in = real_src ? real_in : complex_in;
    if (!in) {
      throw ShapeError("path " + to_string(path.kind) + " is missing its " +
                       to_string(source_domain(path.kind)) + " input");
    }
    if (in->is_complex() == real_src) {
      throw ShapeError("path " + to_string(path.kind) + " received the wrong domain");
    }
    Var y = activate(path.activation, path.conv.forward(*in));
    if (path.norm) y = path.norm->forward(y, training);
    if (path.spec.dropout > 0.0 && training) {
      if (!dropout_rng) throw ArgumentError("dropout in training mode needs a generator");
      y = dropout(y, path.spec.dropout, *dropout_rng, true);
    }
    if (path.spec.conversion) y = convert(*path.spec.conversion, y);
    (target_domain(path.kind) == Domain::Real ? real_parts : complex_parts).push_back(y);
  }
  BlockOutput out;
  auto finish = [&](std::vector<Var>& parts) -> std::optional<Var> {
    if (parts.empty()) return std::nullopt;
    Var v = parts.size() == 1 ? parts.front() : concat(parts, 1);
    if (block.pool > 1) v = avg_pool1d(v, block.pool);
    return v;
  };
  out.real = finish(real_parts);
  out.complex = finish(complex_parts);
  return out;
}

Network::Network(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  validate(spec_);
  Rng rng(seed);
  const auto shapes = infer_shapes(spec_);
  for (std::size_t b = 0; b < spec_.blocks.size(); ++b) {
    BlockModule module;
    module.pool = spec_.blocks[b].pool;
    for (auto k : kAllPaths) {
      const auto& p = spec_.blocks[b].path(k);
      if (!p) continue;
      ConvConfig cfg;
      cfg.domain = source_domain(k);
      cfg.in_channels = cfg.domain == Domain::Real ? shapes[b].real_in : shapes[b].complex_in;
      cfg.out_channels = p->channels;
      cfg.kernel = p->kernel;
      cfg.groups = p->groups;
      module.paths.push_back(PathModule{k, *p, ConvLayer(cfg, rng), activation_by_name(p->activation),
                                        p->norm ? std::optional<Bamn>(Bamn(p->channels))
                                                : std::nullopt});
    }
    blocks_.push_back(std::move(module));
  }
  std::size_t r, c;
  if (shapes.empty()) {
    std::tie(r, c) = first_block_channels(spec_);
  } else {
    r = shapes.back().real_out;
    c = shapes.back().complex_out;
  }
  if (spec_.heads.real) {
    real_head_.emplace(LinearConfig{Domain::Real, r, spec_.heads.classes, true}, rng);
  }
  if (spec_.heads.complex) {
    complex_head_.emplace(LinearConfig{Domain::Complex, c, spec_.heads.classes, true}, rng);
  }
}

Var Network::forward(const NetworkInput& input, bool training, Rng* dropout_rng) {
  std::optional<Var> real, complex;
  auto check = [](const std::optional<Var>& v, std::size_t channels, bool want_complex,
                  const char* what) {
    if (!v) throw ShapeError(std::string("network expects a ") + what + " input");
    if (v->is_complex() != want_complex) {
      throw ShapeError(std::string(what) + " input has the wrong dtype");
    }
    if (v->shape().size() != 3 || v->shape()[1] != channels) {
      throw ShapeError(std::string(what) + " input must be [batch, " + std::to_string(channels) +
                       ", length], got " + shape_to_string(v->shape()));
    }
  };
  if (has_real(spec_.input)) {
    check(input.real, spec_.real_channels, false, "real");
    real = input.real;
  }
  if (has_complex(spec_.input)) {
    check(input.complex, spec_.complex_channels, true, "complex");
    complex = input.complex;
  }
  if (spec_.adapter) {
    if (spec_.adapter->direction == ConversionDirection::C2R) {
      Var r = c2r(*spec_.adapter, *complex);
      real = real ? concat(std::vector<Var>{*real, r}, 1) : r;
    } else {
      Var c = r2c(*spec_.adapter, *real);
      complex = complex ? concat(std::vector<Var>{*complex, c}, 1) : c;
    }
  }
  for (auto& block : blocks_) {
    auto out = block_forward(block, real, complex, training, dropout_rng);
    real = std::move(out.real);
    complex = std::move(out.complex);
  }
  Var logits;
  if (real_head_) logits = real_head_->forward(mean_over_length(*real));
  if (complex_head_) {
    Var z = c2r(spec_.heads.conversion, complex_head_->forward(mean_over_length(*complex)));
    logits = logits.defined() ? add(logits, z) : z;
  }
  return logits;
}

std::vector<Var> Network::parameters() const {
  std::vector<Var> out;
  auto append = [&](std::vector<Var> ps) { out.insert(out.end(), ps.begin(), ps.end()); };
  for (const auto& block : blocks_) {
    for (const auto& path : block.paths) append(path.conv.parameters());
  }
  if (real_head_) append(real_head_->parameters());
  if (complex_head_) append(complex_head_->parameters());
  return out;
}

ParamCount Network::count_parameters() const {
  const auto ps = parameters();
  return hnn::count_parameters(std::span<const Var>(ps));
}

nlohmann::json Network::checkpoint() const {
  nlohmann::json j;
  j["format"] = "hybridnn-network";
  j["architecture"] = network_spec_to_json(spec_);
  j["parameters"] = nlohmann::json::array();
  for (const auto& p : parameters()) j["parameters"].push_back(tensor_to_json(p.value()));
  j["norm_running_mean"] = nlohmann::json::array();
  for (const auto& block : blocks_) {
    for (const auto& path : block.paths) {
      if (path.norm) j["norm_running_mean"].push_back(tensor_to_json(path.norm->running_mean()));
    }
  }
  return j;
}

Network Network::from_checkpoint(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string{}) != "hybridnn-network") {
      throw ConfigError("not a network checkpoint");
    }
    Network net(network_spec_from_json(j.at("architecture")), 0);
    auto params = net.parameters();
    const auto& stored = j.at("parameters");
    if (stored.size() != params.size()) throw ConfigError("checkpoint parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor t = tensor_from_json(stored.at(i));
      if (!t.same_layout(params[i].value())) {
        throw ConfigError("checkpoint tensor " + std::to_string(i) + " has the wrong layout");
      }
      params[i].mutable_value() = std::move(t);
    }
    std::size_t n = 0;
    const auto& means = j.value("norm_running_mean", nlohmann::json::array());
    for (auto& block : net.blocks_) {
      for (auto& path : block.paths) {
        if (!path.norm) continue;
        if (n >= means.size()) throw ConfigError("checkpoint is missing norm statistics");
        path.norm->set_running_mean(tensor_from_json(means.at(n++)));
      }
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

ParamCount count_parameters(const NetworkSpec& spec) { return Network(spec, 0).count_parameters(); }

NetworkSpec make_prototype(IoDomain input, std::size_t real_channels, std::size_t complex_channels,
                           std::size_t classes, const PrototypeOptions& options) {
  NetworkSpec spec;
  spec.input = input;
  spec.real_channels = real_channels;
  spec.complex_channels = complex_channels;
  spec.heads.classes = classes;
  for (std::size_t b = 0; b < options.blocks; ++b) {
    BlockSpec block;
    PathSpec base;
    base.channels = options.channels;
    base.kernel = b == 0 && options.first_kernel > 0 ? options.first_kernel : options.kernel;
    PathSpec rr = base, rc = base, cr = base, cc = base;
    rr.activation = options.real_activation;
    rc.activation = options.real_activation;
    rc.conversion = options.r2c;
    cr.activation = options.complex_activation;
    cr.conversion = options.c2r;
    cc.activation = options.complex_activation;
    block.path(PathKind::RR) = rr;
    block.path(PathKind::RC) = rc;
    block.path(PathKind::CR) = cr;
    block.path(PathKind::CC) = cc;
    spec.blocks.push_back(std::move(block));
  }
  return spec;
}

}  // namespace hnn
