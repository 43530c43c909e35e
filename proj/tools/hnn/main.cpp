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


#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "hybridnn/analysis.hpp"
#include "hybridnn/errors.hpp"
#include "hybridnn/nas.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInfeasible = 4;

void add_data_options(CLI::App* cmd, hnn::cli::AudioDataArgs& a) {
  cmd->add_option("--dataset", a.dataset, "dataset.json written by prep-audio");
  cmd->add_option("--data-root", a.root, "AudioMNIST directory (<digit>_<speaker>_<take>.wav)");
  cmd->add_option("--synthetic", a.synthetic_count, "use N synthetic spoken digits");
  cmd->add_option("--limit", a.limit, "seeded subset size");
  cmd->add_option("--snr", a.snr_db, "noise level in dB");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace hnn::cli;
  CLI::App app{"Hybrid real/complex neural networks: data, training, search and analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx;
  std::string config_path;
  std::string out = "out";
  app.add_option("--seed", ctx.seed, "base random seed")->capture_default_str();
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out, "output directory")->capture_default_str();

  GenSinusoidArgs gen;
  auto* c_gen = app.add_subcommand("gen-sinusoid", "generate the sinusoid regression dataset");
  c_gen->add_option("--count", gen.count, "number of samples");
  c_gen->add_option("--noise-max", gen.noise_max, "largest noise magnitude");

  AudioDataArgs prep;
  auto* c_prep = app.add_subcommand("prep-audio", "check audio data and write the split");
  add_data_options(c_prep, prep);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "train a sinusoid RVNN or an audio classifier");
  c_train->add_option("--model", tr.model, "sinusoid, hnn, rvnn or spec")->capture_default_str();
  c_train->add_option("--spec", tr.spec, "architecture JSON for --model spec");
  c_train->add_option("--epochs", tr.epochs);
  c_train->add_option("--lr", tr.learning_rate);
  c_train->add_option("--batch-size", tr.batch_size);
  add_data_options(c_train, tr.data);

  SearchArgs se;
  auto* c_search = app.add_subcommand("search", "run the phased architecture search");
  c_search->add_option("--task", se.task, "audio or toy");
  c_search->add_option("--trials", se.trials, "trials per phase");
  c_search->add_option("--min-params", se.min_params);
  c_search->add_option("--max-params", se.max_params);
  c_search->add_option("--threads", se.threads);
  add_data_options(c_search, se.data);

  DecodeArgs dec;
  auto* c_dec = app.add_subcommand("decode-weights", "reorder a layer and look for complex blocks");
  c_dec->add_option("--checkpoint", dec.checkpoint, "MLP checkpoint")->required();
  c_dec->add_option("--layer", dec.layer)->capture_default_str();
  c_dec->add_option("--tolerance", dec.tolerance)->capture_default_str();

  ProbeArgs pr;
  auto* c_probe = app.add_subcommand("probe-phase", "sweep the input phase through an MLP");
  c_probe->add_option("--checkpoint", pr.checkpoint, "MLP checkpoint")->required();
  c_probe->add_option("--amplitude", pr.amplitude)->capture_default_str();
  c_probe->add_option("--frequency", pr.frequency)->capture_default_str();
  c_probe->add_option("--resolution", pr.resolution)->capture_default_str();

  ReportArgs rep;
  auto* c_report = app.add_subcommand("report", "render CSV and Markdown tables");
  c_report->add_option("--runs", rep.runs, "run records (JSON, JSON array or NDJSON)");
  c_report->add_option("--trials", rep.trials, "trial store (NDJSON)");
  c_report->add_option("--spec", rep.spec, "architecture or network checkpoint");

  CropArgs cr;
  auto* c_crop = app.add_subcommand("crop-sweep", "accuracy under time truncation");
  c_crop->add_option("--checkpoint", cr.checkpoint, "network checkpoint")->required();
  c_crop->add_option("--max-ratio", cr.limit)->capture_default_str();
  c_crop->add_option("--step", cr.step)->capture_default_str();
  add_data_options(c_crop, cr.data);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    ctx.out = out;
    if (!config_path.empty()) {
      try {
        ctx.config = nlohmann::json::parse(hnn::read_text(config_path));
      } catch (const nlohmann::json::exception& e) {
        throw hnn::ConfigError(config_path + ": " + e.what());
      } catch (const hnn::DataError& e) {
        throw hnn::ConfigError(e.what());
      }
      if (!ctx.config.is_object()) throw hnn::ConfigError(config_path + ": expected a JSON object");
    }
    if (*c_gen) gen_sinusoid(ctx, gen);
    if (*c_prep) prep_audio(ctx, prep);
    if (*c_train) train_model(ctx, tr);
    if (*c_search) search(ctx, se);
    if (*c_dec) decode_weights(ctx, dec);
    if (*c_probe) probe_phase(ctx, pr);
    if (*c_report) report(ctx, rep);
    if (*c_crop) crop_sweep_command(ctx, cr);
  } catch (const hnn::InfeasibleSearchError& e) {
    std::cerr << "infeasible search: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const hnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hnn::ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hnn::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
