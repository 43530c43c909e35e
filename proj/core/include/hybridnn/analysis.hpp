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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridnn/audio.hpp"
#include "hybridnn/datasets.hpp"
#include "hybridnn/hybrid_graph.hpp"
#include "hybridnn/layers.hpp"
#include "hybridnn/nas.hpp"

namespace hnn {

/// Real weight matrix [out, in + 1]; column 0 holds the bias. `order[i]` is
/// the original index of the row now at position i.
struct WeightMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::size_t> order;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

WeightMap make_weight_map(std::size_t rows, std::size_t cols, std::vector<double> values);

/// Weights of a real linear layer with the bias prepended.
WeightMap weight_map(const LinearLayer& layer);

/// Real-equivalent matrix of a complex linear layer: output k becomes rows
/// (2k, 2k+1) = (re, im) and input j becomes columns (1+2j, 2+2j), so every
/// weight w appears as [[Re w, -Im w], [Im w, Re w]].
WeightMap real_equivalent(const LinearLayer& layer);

/// Divides by the largest absolute entry (no-op for an all-zero map).
WeightMap normalize(const WeightMap& map);

/// Inverse permutation of `map.order`.
std::vector<std::size_t> inverse_order(const WeightMap& map);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Greedy similarity chain: seed with the most similar row pair, then keep
/// appending the unplaced row most similar to the chain end. Ties go to the
/// lowest index. Requires at least two rows.
WeightMap reorder_rows(const WeightMap& map);

struct ComplexBlock {
  std::size_t row = 0;  // rows (row, row + 1)
  std::size_t col = 0;  // columns (col, col + 1)
  bool swapped = false; // row + 1 plays the real part
  double wr = 0.0;
  double wi = 0.0;
  double residual = 1.0;
};

struct ComplexBlockReport {
  double tolerance = 0.0;
  std::vector<ComplexBlock> blocks;
  std::size_t candidates = 0;
};

/// Least-squares projection of [[a, b], [c, d]] onto [[wr, -wi], [wi, wr]]:
/// wr = (a + d) / 2, wi = (c - b) / 2, residual = |B - T|_F / |B|_F.
ComplexBlock fit_complex_block(double a, double b, double c, double d);

/// Scans every adjacent row pair (both orientations) against every input
/// column pair (1 + 2k, 2 + 2k) and keeps fits below `tolerance`.
ComplexBlockReport detect_complex_blocks(const WeightMap& map, double tolerance);

/// Sign of the bias (column 0) per row, in the current row order.
std::vector<int> bias_signs(const WeightMap& map);

struct PhaseSweep {
  std::vector<double> phases;
  /// layers[l][step][unit]: activations after layer l (the last is raw).
  std::vector<std::vector<std::vector<double>>> layers;
};

/// Evaluates `mlp` on noise-free sinusoid features for fixed (a, m) while p
/// sweeps [-pi, pi] in `resolution` evenly spaced steps.
PhaseSweep phase_sweep_probe(const Mlp& mlp, double a, double m, std::size_t resolution,
                             const SinusoidOptions& options = {});

/// Diverging blue-white-red heatmap over [-1, 1], one rect per entry.
std::string render_heatmap(const WeightMap& map, double cell = 8.0);

struct RunRecord {
  std::string condition;  // e.g. "No noise", "0 dB"
  double snr_db = 0.0;    // +inf for no noise
  std::string model;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  std::size_t params = 0;
  std::uint64_t seed = 0;
};

nlohmann::json run_record_to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

/// CSV with columns snr_db, model, test_loss, params, test_accuracy, seed.
std::string comparison_csv(std::span<const RunRecord> runs);
/// Markdown table with columns Noise, Model, Test loss, Parameters.
std::string comparison_markdown(std::span<const RunRecord> runs);

/// Per-path layout (block, path, activation, conversion, c, k, n, p, norm, pool).
std::string architecture_csv(const NetworkSpec& spec);
std::string architecture_markdown(const NetworkSpec& spec);

/// One line per trial with id, phase, status, loss, params.
std::string trials_csv(std::span<const Trial> trials);

struct CropPoint {
  double ratio = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Ratios from -limit to +limit in `step` increments (exact tenths for the
/// default arguments).
std::vector<double> crop_ratios(double limit = 0.8, double step = 0.1);

/// Evaluates `net` on `indices` with each crop ratio applied in place of the
/// source's placement.
std::vector<CropPoint> crop_sweep(Network& net, const AudioSource& source,
                                  std::span<const std::size_t> indices,
                                  std::span<const double> ratios, std::size_t batch_size = 64);

std::string crop_curve_csv(std::span<const CropPoint> points);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace hnn
