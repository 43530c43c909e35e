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


#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "hybridnn/analysis.hpp"
#include "hybridnn/errors.hpp"
#include "hybridnn/experiments.hpp"
#include "hybridnn/nas.hpp"

namespace hnn::cli {
namespace fs = std::filesystem;
using nlohmann::json;

json Context::section(const std::string& name) const {
  if (config.is_object() && config.contains(name)) return config.at(name);
  return config;
}

namespace {

json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

AudioDataConfig resolve_audio(const Context& ctx, const AudioDataArgs& a) {
  json base = a.dataset ? read_json(*a.dataset) : ctx.section("data");
  AudioDataConfig defaults;
  defaults.split_seed = ctx.seed;
  AudioDataConfig c = audio_data_config_from_json(base, defaults);
  if (a.root) {
    c.kind = AudioDataKind::AudioMnist;
    c.root = *a.root;
  }
  if (a.synthetic_count) {
    c.kind = AudioDataKind::Synthetic;
    c.synthetic.count = *a.synthetic_count;
  }
  if (a.limit) c.limit = *a.limit;
  if (a.snr_db) c.pipeline.snr_db = *a.snr_db;
  return c;
}

std::string condition_of(double snr) {
  return std::isinf(snr) ? "No noise" : num(snr) + " dB";
}

TaskSpec audio_task_spec() {
  TaskSpec t;
  t.input = IoDomain::Complex;
  t.output = IoDomain::Real;
  t.complex_channels = StftOptions{}.n_fft / 2 + 1;
  t.classes = 10;
  return t;
}

Mlp load_mlp(const std::string& path) {
  const json j = read_json(path);
  if (j.value("kind", std::string{}) != "mlp") {
    throw ConfigError(path + " is not an MLP checkpoint (train one with --model sinusoid)");
  }
  return mlp_from_json(j);
}

std::vector<RunRecord> read_runs(const std::string& path) {
  const std::string text = read_text(path);
  std::vector<json> items;
  try {
    const json j = json::parse(text);
    if (j.is_array()) {
      for (const auto& x : j) items.push_back(x);
    } else if (j.contains("runs")) {
      for (const auto& x : j.at("runs")) items.push_back(x);
    } else {
      items.push_back(j);
    }
  } catch (const json::exception&) {
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      try {
        items.push_back(json::parse(line));
      } catch (const json::exception& e) {
        throw DataError(path + ":" + std::to_string(n) + ": " + e.what());
      }
    }
  }
  std::vector<RunRecord> out;
  for (const auto& x : items) out.push_back(run_record_from_json(x));
  return out;
}

}  // namespace

void gen_sinusoid(const Context& ctx, const GenSinusoidArgs& args) {
  SinusoidExperimentOptions o = sinusoid_options_from_json(ctx.section("sinusoid"));
  o.seed = ctx.seed;
  if (args.count) o.count = *args.count;
  if (args.noise_max) o.data.noise_max = *args.noise_max;
  if (o.count == 0) throw ConfigError("--count must be positive");
  const SinusoidDataset ds = sinusoid_data(o);
  const std::size_t width = 2 * o.data.bins;
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < o.data.bins; ++k) os << "re" << k << ",im" << k << ',';
  os << "m,a_sin_p,a_cos_p,a,p\n";
  const auto x = ds.predictors.real_data();
  const auto y = ds.targets.real_data();
  for (std::size_t i = 0; i < o.count; ++i) {
    for (std::size_t c = 0; c < width; ++c) os << x[i * width + c] << ',';
    os << y[3 * i] << ',' << y[3 * i + 1] << ',' << y[3 * i + 2] << ',' << ds.params[i].a << ','
       << ds.params[i].p << '\n';
  }
  write_text(ctx.out / "sinusoid.csv", os.str());
  write_json(ctx.out / "sinusoid.json", sinusoid_options_to_json(o));
  std::cout << "wrote " << o.count << " samples to " << (ctx.out / "sinusoid.csv").string() << '\n';
}

void prep_audio(const Context& ctx, const AudioDataArgs& args) {
  const AudioDataConfig c = resolve_audio(ctx, args);
  const AudioTask task = make_audio_task(c);
  const ClipCollection& clips = task.source->clips();
  // Reading every clip surfaces unreadable or malformed files now.
  std::size_t longest = 0;
  for (std::size_t i = 0; i < clips.size(); ++i) longest = std::max(longest, clips.content(i).size());
  auto counts = [&](const std::vector<std::size_t>& idx) {
    std::map<int, std::size_t> m;
    for (auto i : idx) ++m[clips.label(i)];
    json j = json::object();
    for (const auto& [label, n] : m) j[std::to_string(label)] = n;
    return j;
  };
  write_json(ctx.out / "dataset.json", audio_data_config_to_json(c));
  save_split(task.split, ctx.out / "split.json");
  write_json(ctx.out / "summary.json", {{"clips", clips.size()},
                                        {"longest_clip_samples", longest},
                                        {"train", counts(task.split.train)},
                                        {"val", counts(task.split.val)},
                                        {"test", counts(task.split.test)}});
  std::cout << clips.size() << " clips (" << task.split.train.size() << " train, "
            << task.split.val.size() << " val, " << task.split.test.size() << " test)\n";
}

void train_model(const Context& ctx, const TrainArgs& args) {
  if (args.model == "sinusoid") {
    SinusoidExperimentOptions o = sinusoid_options_from_json(ctx.section("sinusoid"));
    o.seed = ctx.seed;
    if (args.epochs) o.epochs = *args.epochs;
    if (args.learning_rate) o.learning_rate = *args.learning_rate;
    if (args.batch_size) o.batch_size = *args.batch_size;
    const auto r = run_sinusoid_experiment(o);
    write_json(ctx.out / "checkpoint.json", mlp_to_json(r.mlp));
    std::ostringstream os;
    os << "epoch,loss\n";
    for (std::size_t e = 0; e < r.loss.size(); ++e) os << e << ',' << num(r.loss[e]) << '\n';
    write_text(ctx.out / "loss.csv", os.str());
    write_json(ctx.out / "options.json", sinusoid_options_to_json(o));
    std::cout << "final training loss " << num(r.loss.back()) << '\n';
    return;
  }

  const AudioDataConfig c = resolve_audio(ctx, args.data);
  AudioModelOptions mo;
  const json mj = ctx.section("model");
  try {
    mo.first_channels = mj.value("first_channels", mo.first_channels);
    mo.channels = mj.value("channels", mo.channels);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model options: ") + e.what());
  }
  NetworkSpec spec;
  if (args.model == "hnn") {
    spec = audio_hnn_spec(mo);
  } else if (args.model == "rvnn") {
    spec = audio_rvnn_spec(count_parameters(audio_hnn_spec(mo)).total, mo);
  } else if (args.model == "spec") {
    if (!args.spec) throw ConfigError("--model spec needs --spec <file>");
    const json j = read_json(*args.spec);
    spec = network_spec_from_json(j.contains("architecture") ? j.at("architecture") : j);
  } else {
    throw ConfigError("unknown model '" + args.model + "' (sinusoid, hnn, rvnn, spec)");
  }
  Hyperparams hp = hyperparams_from_json(ctx.section("train"));
  if (args.epochs) hp.epochs = *args.epochs;
  if (args.learning_rate) hp.learning_rate = *args.learning_rate;
  if (args.batch_size) hp.batch_size = *args.batch_size;

  const AudioTask task = make_audio_task(c);
  const TrainedModel m = train_audio_model(spec, task, hp, ctx.seed);
  const TrainReport& r = m.report;
  write_json(ctx.out / "checkpoint.json", m.network.checkpoint());
  json rep = train_report_to_json(r);
  rep["hyperparams"] = hyperparams_to_json(hp);
  rep["data"] = audio_data_config_to_json(c);
  write_json(ctx.out / "report.json", rep);
  const RunRecord run{condition_of(c.pipeline.snr_db), c.pipeline.snr_db, args.model, r.test_loss,
                      r.test_accuracy, r.parameters, ctx.seed};
  write_json(ctx.out / "run.json", run_record_to_json(run));
  std::ostringstream os;
  os << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
    os << e << ',' << num(r.train_loss[e]) << ','
       << (e < r.val_loss.size() ? num(r.val_loss[e]) : "") << '\n';
  }
  write_text(ctx.out / "curve.csv", os.str());
  write_text(ctx.out / "architecture.md", architecture_markdown(spec));
  std::cout << args.model << ": " << r.parameters << " parameters, test loss " << num(r.test_loss)
            << ", test accuracy " << num(r.test_accuracy) << '\n';
}

void search(const Context& ctx, const SearchArgs& args) {
  const json sj = ctx.section("search");
  std::string kind = "audio";
  try {
    kind = args.task.value_or(sj.value("task", kind));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed search task: ") + e.what());
  }
  SearchConfig cfg = search_config_from_json(sj);
  cfg.seed = ctx.seed;
  if (args.trials) cfg.trials_per_phase = *args.trials;
  if (args.min_params) cfg.constraints.min_params = *args.min_params;
  if (args.max_params) cfg.constraints.max_params = *args.max_params;
  if (args.threads) cfg.threads = *args.threads;
  // Full validation before any data is touched.
  cfg = search_config_from_json(search_config_to_json(cfg), cfg);

  std::optional<InMemorySource> toy;
  std::optional<AudioTask> audio;
  TaskSpec task;
  TaskData data;
  if (kind == "toy") {
    ToyOptions t;
    const json tj = ctx.section("toy");
    try {
      t.count = tj.value("count", t.count);
      t.classes = tj.value("classes", t.classes);
      t.channels = tj.value("channels", t.channels);
      t.length = tj.value("length", t.length);
      t.noise = tj.value("noise", t.noise);
      if (tj.contains("domain")) t.domain = io_domain_from_string(tj.at("domain").get<std::string>());
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed toy task: ") + e.what());
    }
    t.seed = ctx.seed;
    toy.emplace(make_toy_source(t));
    const auto labels = labels_of(*toy);
    const Split s = stratified_split(labels, ctx.seed, 0.2, 0.2);
    task.input = t.domain;
    task.output = IoDomain::Real;
    task.real_channels = has_real(t.domain) ? t.channels : 0;
    task.complex_channels = has_complex(t.domain) ? t.channels : 0;
    task.classes = t.classes;
    data = {&*toy, s.train, s.val, s.test, t.classes};
  } else if (kind == "audio") {
    audio.emplace(make_audio_task(resolve_audio(ctx, args.data)));
    task = audio_task_spec();
    data = {audio->source.get(), audio->split.train, audio->split.val, audio->split.test, 10};
  } else {
    throw ConfigError("unknown search task '" + kind + "' (audio, toy)");
  }

  fs::create_directories(ctx.out);
  const fs::path store = ctx.out / "trials.ndjson";
  fs::remove(store);
  cfg.trial_store = store;
  write_json(ctx.out / "search_config.json", search_config_to_json(cfg));
  const TrainingEvaluator evaluator(data);
  SearchState state;
  try {
    state = run_search(task, cfg, evaluator);
  } catch (const InfeasibleSearchError& e) {
    json j = {{"error", e.what()}};
    if (e.best_infeasible) j["best_infeasible"] = trial_to_json(*e.best_infeasible);
    write_json(ctx.out / "infeasible.json", j);
    throw;
  }
  write_json(ctx.out / "state.json", search_state_to_json(state));
  write_json(ctx.out / "best_architecture.json", network_spec_to_json(state.best_architecture));
  write_text(ctx.out / "architecture.md", architecture_markdown(state.best_architecture));
  write_text(ctx.out / "architecture.csv", architecture_csv(state.best_architecture));
  write_text(ctx.out / "trials.csv", trials_csv(state.trials));
  std::cout << state.trials.size() << " trials, best validation loss "
            << num(state.best_validation_loss) << " with " << state.best_param_count
            << " parameters\n";
}

void decode_weights(const Context& ctx, const DecodeArgs& args) {
  const Mlp mlp = load_mlp(args.checkpoint);
  const LayerDecoding d = decode_layer(mlp, args.layer, args.tolerance);
  write_json(ctx.out / "decode.json", layer_decoding_to_json(d));
  write_text(ctx.out / "heatmap.svg", render_heatmap(d.map));
  write_text(ctx.out / "heatmap_reordered.svg", render_heatmap(d.reordered));
  std::cout << "layer " << args.layer << ": " << d.blocks.blocks.size() << " of "
            << d.blocks.candidates << " 2x2 blocks within residual " << num(args.tolerance) << '\n';
}

void probe_phase(const Context& ctx, const ProbeArgs& args) {
  const Mlp mlp = load_mlp(args.checkpoint);
  const SinusoidExperimentOptions o = sinusoid_options_from_json(ctx.section("sinusoid"));
  if (mlp.layers().empty() || mlp.layers().front().config().in_features != 2 * o.data.bins) {
    throw ConfigError("checkpoint input width does not match " + std::to_string(2 * o.data.bins) +
                      " DFT features");
  }
  const PhaseSweep s = phase_sweep_probe(mlp, args.amplitude, args.frequency, args.resolution, o.data);
  std::ostringstream os;
  os << "phase,layer,unit,value\n";
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    for (std::size_t i = 0; i < s.phases.size(); ++i) {
      for (std::size_t u = 0; u < s.layers[l][i].size(); ++u) {
        os << num(s.phases[i]) << ',' << l << ',' << u << ',' << num(s.layers[l][i][u]) << '\n';
      }
    }
  }
  write_text(ctx.out / "phase_sweep.csv", os.str());
  std::cout << "probed " << s.layers.size() << " layers at " << s.phases.size() << " phases\n";
}

void report(const Context& ctx, const ReportArgs& args) {
  if (args.runs.empty() && !args.trials && !args.spec) {
    throw ConfigError("report needs --runs, --trials or --spec");
  }
  if (!args.runs.empty()) {
    std::vector<RunRecord> runs;
    for (const auto& p : args.runs) {
      auto r = read_runs(p);
      runs.insert(runs.end(), r.begin(), r.end());
    }
    write_text(ctx.out / "comparison.csv", comparison_csv(runs));
    write_text(ctx.out / "comparison.md", comparison_markdown(runs));
    std::cout << comparison_markdown(runs);
  }
  if (args.trials) {
    const auto trials = TrialStore::load(*args.trials);
    write_text(ctx.out / "trials.csv", trials_csv(trials));
    std::cout << trials.size() << " trials\n";
  }
  if (args.spec) {
    const json j = read_json(*args.spec);
    const NetworkSpec spec = network_spec_from_json(j.contains("architecture") ? j.at("architecture") : j);
    write_text(ctx.out / "architecture.csv", architecture_csv(spec));
    write_text(ctx.out / "architecture.md", architecture_markdown(spec));
    std::cout << architecture_markdown(spec);
  }
}

void crop_sweep_command(const Context& ctx, const CropArgs& args) {
  Network net = Network::from_checkpoint(read_json(args.checkpoint));
  AudioDataConfig c = resolve_audio(ctx, args.data);
  c.pipeline.crop.reset();
  c.pipeline.random_shift = false;
  const AudioTask task = make_audio_task(c);
  const std::vector<std::size_t>& idx = task.split.test;
  if (idx.empty()) throw DataError("the test split is empty");
  const Evaluation base = evaluate(net, *task.source, idx);
  const auto ratios = crop_ratios(args.limit, args.step);
  const auto points = crop_sweep(net, *task.source, idx, ratios);
  write_text(ctx.out / "crop_curve.csv", crop_curve_csv(points));
  json j = {{"baseline_accuracy", base.accuracy}, {"baseline_loss", base.loss}, {"points", json::array()}};
  for (const auto& p : points) j["points"].push_back({{"ratio", p.ratio}, {"accuracy", p.accuracy}, {"loss", p.loss}});
  write_json(ctx.out / "crop.json", j);
  std::cout << "baseline accuracy " << num(base.accuracy) << " over " << idx.size()
            << " test clips, " << points.size() << " crop ratios\n";
}

}  // namespace hnn::cli
