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


#include "hybridnn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hybridnn/errors.hpp"
#include "hybridnn/seed.hpp"

namespace hnn {
namespace {

// Seeded subset of another collection.
class SubsetClips : public ClipCollection {
 public:
  SubsetClips(std::shared_ptr<const ClipCollection> base, std::vector<std::size_t> keep)
      : base_(std::move(base)), keep_(std::move(keep)) {}
  std::size_t size() const override { return keep_.size(); }
  int label(std::size_t i) const override { return base_->label(keep_.at(i)); }
  int speaker(std::size_t i) const override { return base_->speaker(keep_.at(i)); }
  std::string name(std::size_t i) const override { return base_->name(keep_.at(i)); }
  std::vector<double> content(std::size_t i) const override { return base_->content(keep_.at(i)); }

 private:
  std::shared_ptr<const ClipCollection> base_;
  std::vector<std::size_t> keep_;
};

PathSpec make_path(std::size_t channels, std::size_t kernel, std::string activation,
                   std::optional<ConversionSpec> conversion = std::nullopt) {
  PathSpec p;
  p.channels = channels;
  p.kernel = kernel;
  p.activation = std::move(activation);
  p.conversion = conversion;
  return p;
}

std::string kind_name(AudioDataKind k) { return k == AudioDataKind::Synthetic ? "synthetic" : "audiomnist"; }

}  // namespace

nlohmann::json sinusoid_options_to_json(const SinusoidExperimentOptions& o) {
  return {{"count", o.count},
          {"epochs", o.epochs},
          {"batch_size", o.batch_size},
          {"learning_rate", o.learning_rate},
          {"widths", o.widths},
          {"activation", o.activation},
          {"length", o.data.length},
          {"bins", o.data.bins},
          {"noise_max", o.data.noise_max},
          {"seed", o.seed}};
}

SinusoidExperimentOptions sinusoid_options_from_json(const nlohmann::json& j,
                                                     SinusoidExperimentOptions o) {
  try {
    o.count = j.value("count", o.count);
    o.epochs = j.value("epochs", o.epochs);
    o.batch_size = j.value("batch_size", o.batch_size);
    o.learning_rate = j.value("learning_rate", o.learning_rate);
    o.widths = j.value("widths", o.widths);
    o.activation = j.value("activation", o.activation);
    o.data.length = j.value("length", o.data.length);
    o.data.bins = j.value("bins", o.data.bins);
    o.data.noise_max = j.value("noise_max", o.data.noise_max);
    o.seed = j.value("seed", o.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed sinusoid options: ") + e.what());
  }
  if (o.count == 0 || o.batch_size == 0) throw ConfigError("sinusoid count and batch size must be positive");
  if (o.widths.empty() || o.widths.back() != 3) {
    throw ConfigError("sinusoid network must end in 3 outputs");
  }
  return o;
}

SinusoidDataset sinusoid_data(const SinusoidExperimentOptions& o) {
  return generate_sinusoid_dataset(o.count, derive_seed(o.seed, {0x52}), o.data);
}

Mlp sinusoid_network(const SinusoidExperimentOptions& o) {
  Rng rng(derive_seed(o.seed, {0x51}));
  return Mlp(Domain::Real, 2 * o.data.bins, o.widths, o.activation, rng);
}

SinusoidExperimentResult run_sinusoid_experiment(const SinusoidExperimentOptions& o) {
  const SinusoidDataset ds = sinusoid_data(o);
  Mlp mlp = sinusoid_network(o);
  Hyperparams hp;
  hp.learning_rate = o.learning_rate;
  hp.epochs = o.epochs;
  hp.batch_size = o.batch_size;
  hp.seed = derive_seed(o.seed, {0x53});
  auto loss = train_regression(mlp, ds.predictors, ds.targets, hp);
  return {std::move(mlp), std::move(loss)};
}

LayerDecoding decode_layer(const Mlp& mlp, std::size_t layer, double tolerance) {
  if (layer >= mlp.layers().size()) {
    throw ArgumentError("layer " + std::to_string(layer) + " out of range (network has " +
                        std::to_string(mlp.layers().size()) + ")");
  }
  LayerDecoding d;
  d.map = normalize(weight_map(mlp.layers()[layer]));
  d.reordered = reorder_rows(d.map);
  d.blocks = detect_complex_blocks(d.reordered, tolerance);
  d.bias_signs = bias_signs(d.reordered);
  return d;
}

nlohmann::json layer_decoding_to_json(const LayerDecoding& d) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : d.blocks.blocks) {
    blocks.push_back({{"rows", {b.row, b.row + 1}},
                      {"cols", {b.col, b.col + 1}},
                      {"original_rows", {d.reordered.order[b.row], d.reordered.order[b.row + 1]}},
                      {"swapped", b.swapped},
                      {"wr", b.wr},
                      {"wi", b.wi},
                      {"residual", b.residual}});
  }
  return {{"tolerance", d.blocks.tolerance},
          {"candidates", d.blocks.candidates},
          {"detected", d.blocks.blocks.size()},
          {"row_order", d.reordered.order},
          {"bias_signs", d.bias_signs},
          {"blocks", blocks}};
}

nlohmann::json audio_data_config_to_json(const AudioDataConfig& c) {
  return {{"kind", kind_name(c.kind)},
          {"root", c.root.string()},
          {"count", c.synthetic.count},
          {"speakers", c.synthetic.speakers},
          {"synthetic_seed", c.synthetic.seed},
          {"limit", c.limit},
          {"pipeline", audio_pipeline_to_json(c.pipeline)},
          {"val_fraction", c.val_fraction},
          {"test_fraction", c.test_fraction},
          {"split_seed", c.split_seed}};
}

AudioDataConfig audio_data_config_from_json(const nlohmann::json& j, AudioDataConfig c) {
  try {
    if (j.contains("kind")) {
      const auto k = j.at("kind").get<std::string>();
      if (k == "synthetic") {
        c.kind = AudioDataKind::Synthetic;
      } else if (k == "audiomnist") {
        c.kind = AudioDataKind::AudioMnist;
      } else {
        throw ConfigError("unknown audio data kind '" + k + "'");
      }
    }
    if (j.contains("root")) c.root = j.at("root").get<std::string>();
    c.synthetic.count = j.value("count", c.synthetic.count);
    c.synthetic.speakers = j.value("speakers", c.synthetic.speakers);
    c.synthetic.seed = j.value("synthetic_seed", c.synthetic.seed);
    c.limit = j.value("limit", c.limit);
    if (j.contains("pipeline")) c.pipeline = audio_pipeline_from_json(j.at("pipeline"), c.pipeline);
    c.val_fraction = j.value("val_fraction", c.val_fraction);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.split_seed = j.value("split_seed", c.split_seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed audio data config: ") + e.what());
  }
  if (!(c.val_fraction >= 0 && c.test_fraction >= 0 && c.val_fraction + c.test_fraction < 1)) {
    throw ConfigError("split fractions must be nonnegative and sum below 1");
  }
  if (c.kind == AudioDataKind::AudioMnist && c.root.empty()) {
    throw ConfigError("audiomnist data needs a root directory");
  }
  return c;
}

std::shared_ptr<const ClipCollection> load_clips(const AudioDataConfig& c) {
  std::shared_ptr<const ClipCollection> clips;
  if (c.kind == AudioDataKind::Synthetic) {
    clips = make_synthetic_digits(c.synthetic);
  } else {
    clips = load_audiomnist(c.root);
  }
  if (c.limit == 0 || c.limit >= clips->size()) return clips;
  std::vector<std::size_t> keep(clips->size());
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  Rng rng(derive_seed(c.split_seed, {0x5ab5e7}));
  std::shuffle(keep.begin(), keep.end(), rng);
  keep.resize(c.limit);
  std::sort(keep.begin(), keep.end());
  return std::make_shared<SubsetClips>(clips, std::move(keep));
}

AudioTask make_audio_task(const AudioDataConfig& c) {
  AudioTask task;
  task.source = std::make_shared<AudioSource>(load_clips(c), c.pipeline);
  std::vector<int> labels(task.source->size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = task.source->label(i);
  task.split = stratified_split(labels, c.split_seed, c.val_fraction, c.test_fraction);
  return task;
}

NetworkSpec audio_hnn_spec(const AudioModelOptions& o) {
  NetworkSpec s;
  s.input = IoDomain::Complex;
  s.complex_channels = StftOptions{}.n_fft / 2 + 1;
  s.heads.classes = o.classes;
  s.heads.complex = false;

  BlockSpec b0;
  b0.pool = 2;
  b0.path(PathKind::CC) = make_path(o.first_channels, 1, "cTanh");
  b0.path(PathKind::CR) = make_path(o.first_channels, 1, "none", c2r_spec(ConversionKind::Mag));
  BlockSpec b1;
  b1.pool = 2;
  b1.path(PathKind::RR) = make_path(o.channels, 3, "ReLU");
  b1.path(PathKind::CR) = make_path(o.first_channels, 3, "none", c2r_spec(ConversionKind::Mag));
  BlockSpec b2;
  b2.path(PathKind::RR) = make_path(o.channels, 3, "ReLU");
  s.blocks = {b0, b1, b2};
  validate(s);
  return s;
}

NetworkSpec audio_rvnn_spec(std::size_t target_params, const AudioModelOptions& o) {
  auto build = [&](std::size_t width) {
    NetworkSpec s;
    s.input = IoDomain::Complex;
    s.complex_channels = StftOptions{}.n_fft / 2 + 1;
    s.adapter = c2r_spec(ConversionKind::Cartesian);
    s.heads.classes = o.classes;
    s.heads.complex = false;
    BlockSpec b0;
    b0.pool = 2;
    b0.path(PathKind::RR) = make_path(width, 1, "ReLU");
    BlockSpec b1;
    b1.pool = 2;
    b1.path(PathKind::RR) = make_path(o.channels, 3, "ReLU");
    BlockSpec b2;
    b2.path(PathKind::RR) = make_path(o.channels, 3, "ReLU");
    s.blocks = {b0, b1, b2};
    return s;
  };
  NetworkSpec best = build(1);
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (std::size_t w = 1; w <= 512; ++w) {
    NetworkSpec s = build(w);
    const std::size_t n = count_parameters(s).total;
    const std::size_t gap = n > target_params ? n - target_params : target_params - n;
    if (gap < best_gap) {
      best_gap = gap;
      best = std::move(s);
    }
    if (n > target_params) break;
  }
  validate(best);
  return best;
}

TrainedModel train_audio_model(const NetworkSpec& spec, const AudioTask& task, Hyperparams hp,
                               std::uint64_t seed) {
  if (!task.source) throw ArgumentError("audio task has no source");
  AudioSource source = *task.source;
  AudioPipeline p = source.pipeline();
  p.seed = derive_seed(seed, {0xa0d10});
  source.set_pipeline(p);
  hp.seed = derive_seed(seed, {0x7a1});
  Network net(spec, derive_seed(seed, {0x1e7}));
  const TaskData data{&source, task.split.train, task.split.val, task.split.test, spec.heads.classes};
  TrainReport report = train(net, data, hp);
  return {std::move(net), std::move(report)};
}

}  // namespace hnn
