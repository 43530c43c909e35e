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

#include "hybridnn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "hybridnn/errors.hpp"

namespace hnn {

WeightMap make_weight_map(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (values.size() != rows * cols) throw ShapeError("weight map size mismatch");
  WeightMap m;
  m.rows = rows;
  m.cols = cols;
  m.values = std::move(values);
  m.order.resize(rows);
  std::iota(m.order.begin(), m.order.end(), std::size_t{0});
  return m;
}

WeightMap weight_map(const LinearLayer& layer) {
  const auto& cfg = layer.config();
  if (cfg.domain != Domain::Real) throw ArgumentError("weight_map expects a real layer");
  const std::size_t out = cfg.out_features, in = cfg.in_features;
  const auto w = layer.weight.value().real_data();
  std::vector<double> v(out * (in + 1), 0.0);
  for (std::size_t r = 0; r < out; ++r) {
    if (layer.bias.defined()) v[r * (in + 1)] = layer.bias.value().real_data()[r];
    for (std::size_t c = 0; c < in; ++c) v[r * (in + 1) + 1 + c] = w[r * in + c];
  }
  return make_weight_map(out, in + 1, std::move(v));
}

WeightMap real_equivalent(const LinearLayer& layer) {
  const auto& cfg = layer.config();
  if (cfg.domain != Domain::Complex) throw ArgumentError("real_equivalent expects a complex layer");
  const std::size_t out = cfg.out_features, in = cfg.in_features;
  const std::size_t rows = 2 * out, cols = 2 * in + 1;
  const auto w = layer.weight.value().complex_data();
  std::vector<double> v(rows * cols, 0.0);
  for (std::size_t k = 0; k < out; ++k) {
    if (layer.bias.defined()) {
      const cplx b = layer.bias.value().complex_data()[k];
      v[(2 * k) * cols] = b.real();
      v[(2 * k + 1) * cols] = b.imag();
    }
    for (std::size_t j = 0; j < in; ++j) {
      const cplx z = w[k * in + j];
      v[(2 * k) * cols + 1 + 2 * j] = z.real();
      v[(2 * k) * cols + 2 + 2 * j] = -z.imag();
      v[(2 * k + 1) * cols + 1 + 2 * j] = z.imag();
      v[(2 * k + 1) * cols + 2 + 2 * j] = z.real();
    }
  }
  return make_weight_map(rows, cols, std::move(v));
}

WeightMap normalize(const WeightMap& map) {
  WeightMap out = map;
  double peak = 0.0;
  for (double v : map.values) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (auto& v : out.values) v /= peak;
  }
  return out;
}

std::vector<std::size_t> inverse_order(const WeightMap& map) {
  std::vector<std::size_t> inv(map.order.size());
  for (std::size_t i = 0; i < map.order.size(); ++i) inv.at(map.order[i]) = i;
  return inv;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("cosine similarity needs equal lengths");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

WeightMap reorder_rows(const WeightMap& map) {
  const std::size_t n = map.rows;
  if (n < 2) throw ArgumentError("reorder_rows needs at least two rows");
  std::vector<double> sim(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sim[i * n + j] = sim[j * n + i] = cosine_similarity(map.row(i), map.row(j));
    }
  }
  std::size_t bi = 0, bj = 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (sim[i * n + j] > sim[bi * n + bj]) {
        bi = i;
        bj = j;
      }
    }
  }
  std::vector<std::size_t> chain{bi, bj};
  std::vector<bool> placed(n, false);
  placed[bi] = placed[bj] = true;
  while (chain.size() < n) {
    const std::size_t tail = chain.back();
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (placed[j]) continue;
      if (best == n || sim[tail * n + j] > sim[tail * n + best]) best = j;
    }
    placed[best] = true;
    chain.push_back(best);
  }
  WeightMap out;
  out.rows = n;
  out.cols = map.cols;
  out.values.reserve(map.values.size());
  for (auto r : chain) {
    const auto row = map.row(r);
    out.values.insert(out.values.end(), row.begin(), row.end());
    out.order.push_back(map.order.at(r));
  }
  return out;
}

ComplexBlock fit_complex_block(double a, double b, double c, double d) {
  ComplexBlock blk;
  blk.wr = 0.5 * (a + d);
  blk.wi = 0.5 * (c - b);
  const double norm = std::sqrt(a * a + b * b + c * c + d * d);
  if (norm == 0.0) {
    blk.residual = 1.0;
    return blk;
  }
  const double e1 = a - blk.wr, e2 = b + blk.wi, e3 = c - blk.wi, e4 = d - blk.wr;
  blk.residual = std::sqrt(e1 * e1 + e2 * e2 + e3 * e3 + e4 * e4) / norm;
  return blk;
}

ComplexBlockReport detect_complex_blocks(const WeightMap& map, double tolerance) {
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw ArgumentError("tolerance must lie in (0, 1)");
  ComplexBlockReport report;
  report.tolerance = tolerance;
  if (map.rows < 2 || map.cols < 3) return report;
  for (std::size_t r = 0; r + 1 < map.rows; ++r) {
    for (std::size_t c = 1; c + 1 < map.cols; c += 2) {
      ++report.candidates;
      ComplexBlock direct =
          fit_complex_block(map.at(r, c), map.at(r, c + 1), map.at(r + 1, c), map.at(r + 1, c + 1));
      ComplexBlock flipped =
          fit_complex_block(map.at(r + 1, c), map.at(r + 1, c + 1), map.at(r, c), map.at(r, c + 1));
      flipped.swapped = true;
      ComplexBlock best = flipped.residual < direct.residual ? flipped : direct;
      best.row = r;
      best.col = c;
      if (best.residual < tolerance) report.blocks.push_back(best);
    }
  }
  return report;
}

std::vector<int> bias_signs(const WeightMap& map) {
  std::vector<int> out(map.rows);
  for (std::size_t r = 0; r < map.rows; ++r) {
    const double b = map.at(r, 0);
    out[r] = b > 0 ? 1 : (b < 0 ? -1 : 0);
  }
  return out;
}

PhaseSweep phase_sweep_probe(const Mlp& mlp, double a, double m, std::size_t resolution,
                             const SinusoidOptions& options) {
  if (resolution == 0) throw ArgumentError("phase sweep needs at least one step");
  PhaseSweep sweep;
  const std::size_t width = 2 * options.bins;
  std::vector<double> x;
  x.reserve(resolution * width);
  for (std::size_t s = 0; s < resolution; ++s) {
    const double p = resolution == 1 ? 0.0
                                     : -std::numbers::pi + 2.0 * std::numbers::pi *
                                                               static_cast<double>(s) /
                                                               static_cast<double>(resolution - 1);
    sweep.phases.push_back(p);
    const auto f = sinusoid_predictors({a, m, p}, {}, options);
    x.insert(x.end(), f.begin(), f.end());
  }
  const auto trace = mlp.forward_trace(Var(Tensor::real({resolution, width}, std::move(x))));
  for (const auto& layer : trace) {
    const std::size_t units = layer.shape()[1];
    const auto d = layer.value().real_data();
    std::vector<std::vector<double>> steps(resolution, std::vector<double>(units));
    for (std::size_t s = 0; s < resolution; ++s) {
      for (std::size_t u = 0; u < units; ++u) steps[s][u] = d[s * units + u];
    }
    sweep.layers.push_back(std::move(steps));
  }
  return sweep;
}

std::string render_heatmap(const WeightMap& map, double cell) {
  if (!(cell > 0.0)) throw ArgumentError("cell size must be positive");
  std::ostringstream os;
  os.precision(10);
  const double w = cell * static_cast<double>(map.cols), h = cell * static_cast<double>(map.rows);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  for (std::size_t r = 0; r < map.rows; ++r) {
    for (std::size_t c = 0; c < map.cols; ++c) {
      const double v = std::clamp(map.at(r, c), -1.0, 1.0);
      const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(v))));
      const int red = v < 0 ? fade : 255, blue = v > 0 ? fade : 255;
      os << "<rect x=\"" << cell * static_cast<double>(c) << "\" y=\""
         << cell * static_cast<double>(r) << "\" width=\"" << cell << "\" height=\"" << cell
         << "\" fill=\"rgb(" << red << ',' << fade << ',' << blue << ")\"><title>" << map.at(r, c)
         << "</title></rect>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<double> crop_ratios(double limit, double step) {
  if (!(step > 0.0) || limit < 0.0) throw ArgumentError("crop ratios need step > 0 and limit >= 0");
  const auto n = static_cast<long>(std::floor(limit / step + 1e-9));
  std::vector<double> out;
  for (long i = -n; i <= n; ++i) {
    // Round to ten decimals so 0.1 steps print as exact tenths.
    out.push_back(std::round(static_cast<double>(i) * step * 1e10) / 1e10);
  }
  return out;
}

std::vector<CropPoint> crop_sweep(Network& net, const AudioSource& source,
                                  std::span<const std::size_t> indices,
                                  std::span<const double> ratios, std::size_t batch_size) {
  std::vector<CropPoint> out;
  for (double r : ratios) {
    AudioSource cropped = source;
    AudioPipeline p = source.pipeline();
    p.crop = r;
    cropped.set_pipeline(p);
    const auto ev = evaluate(net, cropped, indices, batch_size, 0);
    out.push_back({r, ev.loss, ev.accuracy});
  }
  return out;
}

}  // namespace hnn
