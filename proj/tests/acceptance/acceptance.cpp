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

// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Pass criterion numbers as arguments to
// run a subset.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridnn/activations.hpp"
#include "hybridnn/analysis.hpp"
#include "hybridnn/audio.hpp"
#include "hybridnn/conversion.hpp"
#include "hybridnn/errors.hpp"
#include "hybridnn/experiments.hpp"
#include "hybridnn/hybrid_graph.hpp"
#include "hybridnn/layers.hpp"
#include "hybridnn/nas.hpp"
#include "hybridnn/ops.hpp"

namespace fs = std::filesystem;

namespace hnn {
namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

Tensor uniform_tensor(const Shape& shape, DType dtype, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape, dtype);
  if (t.is_complex()) {
    for (auto& v : t.complex_data()) v = {u(rng), u(rng)};
  } else {
    for (auto& v : t.real_data()) v = u(rng);
  }
  return t;
}

Tensor polar_tensor(const Shape& shape, Rng& rng, double rmin, double rmax) {
  std::uniform_real_distribution<double> r(rmin, rmax), th(-kPi, kPi);
  Tensor t(shape, DType::Complex128);
  for (auto& v : t.complex_data()) v = std::polar(r(rng), th(rng));
  return t;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// 1. Gradients

struct GradProblem {
  std::function<Var()> forward;
  std::vector<Var> params;
};

using GradSetup = std::function<GradProblem(Rng&)>;

std::vector<double> flatten(const GradientMap& g, const std::vector<Var>& params) {
  std::vector<double> out;
  for (const auto& p : params) {
    const Tensor& t = g.at(*p.param_id()).value;
    for (std::size_t i = 0; i < t.numel(); ++i) {
      out.push_back(t.at(i).real());
      if (t.is_complex()) out.push_back(t.at(i).imag());
    }
  }
  return out;
}

struct GradStats {
  double worst = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

// Reverse mode against central differences (step 1e-6) at `points` draws.
// A draw where the 1e-6 and 1e-4 differences disagree sits next to a kink
// and is redrawn.
GradStats gradient_points(const GradSetup& setup, std::size_t points, std::uint64_t seed) {
  Rng rng(seed);
  GradStats s;
  while (s.accepted < points) {
    if (s.rejected > 20 * points) throw NumericError("too many draws near non-smooth points");
    GradProblem p = setup(rng);
    const Shape out_shape = p.forward().shape();
    const Tensor a = uniform_tensor(out_shape, DType::Real64, rng);
    const Tensor b = uniform_tensor(out_shape, DType::Real64, rng);
    auto project = [&](const Var& out) {
      if (!out.is_complex()) return sum(mul(out, Var(a)));
      return add(sum(mul(real(out), Var(a))), sum(mul(imag(out), Var(b))));
    };
    const auto ad = flatten(backward(project(p.forward()), p.params), p.params);
    auto f = [&] { return project(p.forward()).value().item_real(); };
    const auto fd = flatten(finite_difference_gradient(f, p.params, 1e-6), p.params);
    const auto coarse = flatten(finite_difference_gradient(f, p.params, 1e-4), p.params);
    const double scale = std::max(norm(fd), 1e-12);
    if (distance(fd, coarse) > 1e-4 * scale) {
      ++s.rejected;
      continue;
    }
    s.worst = std::max(s.worst, distance(ad, fd) / scale);
    ++s.accepted;
  }
  return s;
}

GradSetup conv_case(ConvConfig cfg) {
  return [cfg](Rng& rng) {
    auto layer = std::make_shared<ConvLayer>(cfg, rng);
    Var x = Var::parameter(uniform_tensor({2, cfg.in_channels, 7}, to_dtype(cfg.domain), rng));
    std::vector<Var> params = layer->parameters();
    params.push_back(x);
    return GradProblem{[layer, x] { return layer->forward(x); }, params};
  };
}

GradSetup linear_case(LinearConfig cfg) {
  return [cfg](Rng& rng) {
    auto layer = std::make_shared<LinearLayer>(cfg, rng);
    Var x = Var::parameter(uniform_tensor({3, cfg.in_features}, to_dtype(cfg.domain), rng));
    std::vector<Var> params = layer->parameters();
    params.push_back(x);
    return GradProblem{[layer, x] { return layer->forward(x); }, params};
  };
}

GradSetup bamn_case(DType dtype) {
  return [dtype](Rng& rng) {
    auto norm_layer = std::make_shared<Bamn>(3);
    Var x = Var::parameter(uniform_tensor({3, 3, 5}, dtype, rng));
    return GradProblem{[norm_layer, x] { return norm_layer->forward(x, true); }, {x}};
  };
}

GradSetup pool_case(DType dtype) {
  return [dtype](Rng& rng) {
    Var x = Var::parameter(uniform_tensor({2, 3, 8}, dtype, rng));
    return GradProblem{[x] { return avg_pool1d(x, 2); }, {x}};
  };
}

GradSetup dropout_case(DType dtype) {
  return [dtype](Rng& rng) {
    Var x = Var::parameter(uniform_tensor({2, 3, 6}, dtype, rng));
    const Rng mask_rng(rng());
    return GradProblem{[x, mask_rng] {
                         Rng r = mask_rng;
                         return dropout(x, 0.3, r, true);
                       },
                       {x}};
  };
}

PathSpec grad_path(std::string activation, std::optional<ConversionSpec> conversion = {},
                   bool norm_flag = false) {
  PathSpec p;
  p.channels = 2;
  p.kernel = 3;
  p.activation = std::move(activation);
  p.conversion = conversion;
  p.norm = norm_flag;
  return p;
}

GradSetup network_case() {
  return [](Rng& rng) {
    NetworkSpec s;
    s.input = IoDomain::Both;
    s.real_channels = 2;
    s.complex_channels = 2;
    s.heads.classes = 3;
    BlockSpec b0;
    b0.path(PathKind::RR) = grad_path("Tanh", {}, true);
    b0.path(PathKind::RC) = grad_path("Softplus", r2c_spec(ConversionKind::Polar));
    b0.path(PathKind::CR) = grad_path("cTanh", c2r_spec(ConversionKind::Cartesian));
    b0.path(PathKind::CC) = grad_path("cSoftPlus", {}, true);
    b0.pool = 2;
    BlockSpec b1 = b0;
    b1.path(PathKind::CR) = grad_path("cTanh", c2r_spec(ConversionKind::MultiMagReal));
    b1.pool = 1;
    s.blocks = {b0, b1};
    auto net = std::make_shared<Network>(s, rng());
    Var xr = Var::parameter(uniform_tensor({2, 2, 6}, DType::Real64, rng));
    Var xc = Var::parameter(polar_tensor({2, 2, 6}, rng, 0.3, 1.5));
    std::vector<Var> params = net->parameters();
    params.push_back(xr);
    params.push_back(xc);
    return GradProblem{[net, xr, xc] { return net->forward(NetworkInput{xr, xc}, false); }, params};
  };
}

GradSetup complex_activation_case(ActivationSpec spec) {
  return [spec](Rng& rng) {
    Var z = Var::parameter(polar_tensor({8}, rng, 0.1, 3.0));
    return GradProblem{[spec, z] { return activate(spec, z); }, {z}};
  };
}

GradSetup real_activation_case(std::string name) {
  return [name](Rng& rng) {
    Var x = Var::parameter(uniform_tensor({8}, DType::Real64, rng, -3.0, 3.0));
    return GradProblem{[name, x] { return activate_real(name, x); }, {x}};
  };
}

GradSetup conversion_case(ConversionSpec spec) {
  return [spec](Rng& rng) {
    if (spec.direction == ConversionDirection::R2C) {
      std::uniform_real_distribution<double> mag(0.2, 1.5);
      std::bernoulli_distribution sign(0.5);
      Tensor t({2, 2 * spec.in_arity(), 3}, DType::Real64);
      for (auto& v : t.real_data()) v = sign(rng) ? mag(rng) : -mag(rng);
      Var x = Var::parameter(t);
      return GradProblem{[spec, x] { return r2c(spec, x); }, {x}};
    }
    Var z = Var::parameter(polar_tensor({2, 2, 3}, rng, 0.3, 2.0));
    return GradProblem{[spec, z] { return c2r(spec, z); }, {z}};
  };
}

Outcome criterion_gradients() {
  std::vector<std::pair<std::string, GradSetup>> cases;
  for (Domain d : {Domain::Real, Domain::Complex}) {
    const std::string tag = to_string(d);
    cases.emplace_back("conv/" + tag, conv_case({d, 3, 4, 3, 1, 1, true}));
    cases.emplace_back("conv-stride/" + tag, conv_case({d, 2, 3, 5, 2, 1, true}));
    cases.emplace_back("conv-groups/" + tag, conv_case({d, 4, 4, 3, 1, 2, false}));
    cases.emplace_back("linear/" + tag, linear_case({d, 5, 3, true}));
    cases.emplace_back("bamn/" + tag, bamn_case(to_dtype(d)));
    cases.emplace_back("avg-pool/" + tag, pool_case(to_dtype(d)));
    cases.emplace_back("dropout/" + tag, dropout_case(to_dtype(d)));
  }
  cases.emplace_back("hybrid-network", network_case());
  for (const auto& spec : list_presets()) {
    if (spec.family == ActivationFamily::None) continue;
    cases.emplace_back("activation/" + spec.name, complex_activation_case(spec));
  }
  cases.emplace_back("activation/ELUApprox", complex_activation_case(elu_surrogate()));
  std::vector<std::string> reals = real_activation_names();
  reals.push_back("ELU");
  for (const auto& name : reals) cases.emplace_back("activation/" + name, real_activation_case(name));
  for (const auto& spec : all_conversions()) {
    cases.emplace_back("conversion/" + spec.name(), conversion_case(spec));
  }

  double worst = 0.0;
  std::string worst_name;
  std::size_t rejected = 0;
  std::uint64_t seed = 1000;
  for (const auto& [name, setup] : cases) {
    const GradStats s = gradient_points(setup, 50, seed++);
    rejected += s.rejected;
    if (s.worst >= worst) {
      worst = s.worst;
      worst_name = name;
    }
  }
  return {worst < 1e-5, std::to_string(cases.size()) + " cases x 50 points, worst relative error " +
                            sci(worst) + " (" + worst_name + "), " + std::to_string(rejected) +
                            " draws near kinks redrawn"};
}

// ---------------------------------------------------------------------------
// 2. Complex convolution as a constrained real convolution

Outcome criterion_conv_equivalence() {
  Rng rng(2);
  std::uniform_int_distribution<std::size_t> ch(1, 4), kern(0, 2);
  double worst = 0.0;
  std::size_t runs = 0;
  for (int c = 0; c < 10; ++c) {
    const std::size_t groups = c % 3 == 2 ? 2 : 1;
    const std::size_t cin = ch(rng) * groups, cout = ch(rng) * groups;
    const std::size_t k = 2 * kern(rng) + 1, stride = c % 2 == 0 ? 1 : 2;
    const ConvConfig cc{Domain::Complex, cin, cout, k, stride, groups, true};
    const ConvLayer complex_layer(cc, rng);

    // [[Wr, -Wi], [Wi, Wr]] over (re block, im block) channel halves.
    const Tensor& w = complex_layer.weight.value();
    const Tensor& bias = complex_layer.bias.value();
    const std::size_t cin_g = cin / groups, cout_g = cout / groups;
    Tensor wr({2 * cout, 2 * cin, k}, DType::Real64);
    auto at = [&](std::size_t o, std::size_t i, std::size_t t) -> double& {
      return wr.real_data()[(o * 2 * cin + i) * k + t];
    };
    for (std::size_t o = 0; o < cout; ++o) {
      const std::size_t g = o / cout_g;
      for (std::size_t j = 0; j < cin_g; ++j) {
        const std::size_t i = g * cin_g + j;
        for (std::size_t t = 0; t < k; ++t) {
          const cplx v = w.complex_data()[(o * cin_g + j) * k + t];
          at(o, i, t) = v.real();
          at(o, cin + i, t) = -v.imag();
          at(cout + o, i, t) = v.imag();
          at(cout + o, cin + i, t) = v.real();
        }
      }
    }
    Tensor br({2 * cout}, DType::Real64);
    for (std::size_t o = 0; o < cout; ++o) {
      br.real_data()[o] = bias.complex_data()[o].real();
      br.real_data()[cout + o] = bias.complex_data()[o].imag();
    }
    const ConvLayer real_layer({Domain::Real, 2 * cin, 2 * cout, k, stride, 1, true}, wr, br);

    for (int n = 0; n < 10; ++n) {
      const std::size_t batch = 2, length = 9;
      const Tensor z = uniform_tensor({batch, cin, length}, DType::Complex128, rng);
      Tensor x({batch, 2 * cin, length}, DType::Real64);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t i = 0; i < cin; ++i) {
          for (std::size_t l = 0; l < length; ++l) {
            const cplx v = z.complex_data()[(b * cin + i) * length + l];
            x.real_data()[(b * 2 * cin + i) * length + l] = v.real();
            x.real_data()[(b * 2 * cin + cin + i) * length + l] = v.imag();
          }
        }
      }
      const Tensor yc = complex_layer.forward(Var(z)).value();
      const Tensor yr = real_layer.forward(Var(x)).value();
      const std::size_t lout = yc.extent(2);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < cout; ++o) {
          for (std::size_t l = 0; l < lout; ++l) {
            const cplx v = yc.complex_data()[(b * cout + o) * lout + l];
            const double re = yr.real_data()[(b * 2 * cout + o) * lout + l];
            const double im = yr.real_data()[(b * 2 * cout + cout + o) * lout + l];
            worst = std::max({worst, std::abs(v.real() - re), std::abs(v.imag() - im)});
          }
        }
      }
      ++runs;
    }
  }
  return {worst < 1e-12,
          std::to_string(runs) + " conv/input pairs, max deviation " + sci(worst)};
}

// ---------------------------------------------------------------------------
// 3. Lossless conversion round trips

// Solves the 3x3 system m x = d by Cramer's rule.
std::array<double, 3> solve3(const std::array<std::array<double, 3>, 3>& m,
                             const std::array<double, 3>& d) {
  auto det = [](const std::array<std::array<double, 3>, 3>& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double base = det(m);
  std::array<double, 3> x{};
  for (int c = 0; c < 3; ++c) {
    auto mc = m;
    for (int r = 0; r < 3; ++r) mc[r][c] = d[r];
    x[c] = det(mc) / base;
  }
  return x;
}

Outcome criterion_round_trips() {
  Rng rng(3);
  const std::size_t n = 1000;
  const Tensor z = polar_tensor({n}, rng, 0.05, 3.0);
  std::ostringstream detail;
  bool pass = true;
  for (const auto& spec : {c2r_spec(ConversionKind::Cartesian), c2r_spec(ConversionKind::Polar),
                           c2r_spec(ConversionKind::MultiMagReal, 3)}) {
    const Tensor y = c2r(spec, Var(z)).value();
    const std::size_t arity = spec.out_arity();
    const Tensor lib = invert_lossless(spec, y);
    double lib_err = 0.0, oracle_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* g = y.real_data().data() + i * arity;
      cplx rec;
      if (spec.kind == ConversionKind::Cartesian) {
        rec = {g[0], g[1]};
      } else if (spec.kind == ConversionKind::Polar) {
        rec = std::polar(g[0], kPi * g[1]);
      } else {
        // 2 y_n = |z| + Re z cos t_n + Im z sin t_n, t_n = 2 pi n / 3.
        std::array<std::array<double, 3>, 3> m{};
        std::array<double, 3> d{};
        for (int k = 0; k < 3; ++k) {
          const double t = 2.0 * kPi * k / 3.0;
          m[k] = {1.0, std::cos(t), std::sin(t)};
          d[k] = 2.0 * g[k];
        }
        const auto x = solve3(m, d);
        rec = {x[1], x[2]};
      }
      oracle_err = std::max(oracle_err, std::abs(rec - z.complex_data()[i]));
      lib_err = std::max(lib_err, std::abs(lib.complex_data()[i] - z.complex_data()[i]));
    }
    pass = pass && oracle_err < 1e-9 && lib_err < 1e-9;
    detail << spec.name() << " inverse " << sci(lib_err) << " oracle " << sci(oracle_err) << "; ";
  }
  return {pass, detail.str() + std::to_string(n) + " samples"};
}

// ---------------------------------------------------------------------------
// 4. Activation shape fidelity on the real axis

Outcome criterion_activation_shapes() {
  const std::size_t steps = 601;
  Tensor x({steps}, DType::Real64);
  for (std::size_t i = 0; i < steps; ++i) x.real_data()[i] = -3.0 + 6.0 * i / (steps - 1);
  const Var xv(x);
  auto deviation = [&](const ActivationSpec& spec, const Tensor& ref) {
    const Tensor y = activate(spec, xv).value();
    double worst = 0.0;
    for (std::size_t i = 0; i < steps; ++i) worst = std::max(worst, std::abs(y.at(i) - ref.at(i)));
    return worst;
  };
  Tensor absx = x;
  for (auto& v : absx.real_data()) v = std::abs(v);
  const double relu_dev = deviation(preset("cReLU"), relu(xv).value());
  const double abs_dev = deviation(preset("cAbs"), absx);
  const double elu_dev = deviation(elu_surrogate(), elu(xv).value());
  const double approx = activate(elu_surrogate(), Var(Tensor::scalar(-1.0))).value().item().real();
  const double exact = std::expm1(-1.0);
  const bool pass = relu_dev < 0.05 && abs_dev < 0.05 && elu_dev < 0.05 &&
                    std::abs(approx - (-0.6328)) <= 1e-3;
  return {pass, "max deviation cReLU " + fmt(relu_dev) + ", cAbs " + fmt(abs_dev) +
                    ", ELUApprox " + fmt(elu_dev) + "; ELUApprox(-1) = " + fmt(approx, 6) +
                    ", ELU(-1) = " + fmt(exact, 6)};
}

// ---------------------------------------------------------------------------
// 5. Preset table

Outcome criterion_preset_table() {
  std::ifstream in(HYBRIDNN_GOLDEN_DIR "/table1_presets.json");
  if (!in) return {false, "golden file missing"};
  const auto golden = nlohmann::json::parse(in);
  auto value = [](const nlohmann::json& cell) { return cell.is_null() ? 0.0 : cell.get<double>(); };
  std::size_t checked = 0;
  std::string mismatch;
  for (const auto& row : golden.at("rows")) {
    const auto spec = preset(row[0].get<std::string>());
    bool ok = to_string(spec.family) == row[1].get<std::string>() &&
              spec.q == static_cast<int>(value(row[2])) && spec.alpha == cplx(value(row[3]), 0) &&
              spec.epsilon == value(row[8]);
    for (int k = 0; k < 4; ++k) ok = ok && spec.k[k] == cplx(value(row[4 + k]), 0);
    if (!ok) mismatch += " " + spec.name;
    ++checked;
  }
  const bool pass = mismatch.empty() && checked == 8;
  return {pass, std::to_string(checked) + " presets compared" +
                    (mismatch.empty() ? std::string() : ", mismatched:" + mismatch)};
}

// ---------------------------------------------------------------------------
// 6. Parameter counting

Outcome criterion_parameter_count() {
  Rng rng(6);
  std::uniform_int_distribution<std::size_t> small(1, 6), kern(1, 7);
  std::bernoulli_distribution coin(0.5);
  std::size_t agree = 0;
  const std::size_t total = 20;
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t real_count = 0, complex_count = 0;
    if (i % 2 == 0) {
      const std::size_t groups = coin(rng) ? 2 : 1;
      ConvConfig c{Domain::Real, small(rng) * groups, small(rng) * groups, kern(rng), 1, groups,
                   coin(rng)};
      real_count = ConvLayer(c, rng).count_parameters().total;
      c.domain = Domain::Complex;
      complex_count = ConvLayer(c, rng).count_parameters().total;
    } else {
      LinearConfig c{Domain::Real, small(rng) * 3, small(rng) * 2, coin(rng)};
      real_count = LinearLayer(c, rng).count_parameters().total;
      c.domain = Domain::Complex;
      complex_count = LinearLayer(c, rng).count_parameters().total;
    }
    agree += complex_count == 2 * real_count && real_count > 0 ? 1 : 0;
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) +
                              " random conv/linear configs count exactly twice their real twins"};
}

// ---------------------------------------------------------------------------
// 7. Sinusoid weight decoding

Outcome criterion_sinusoid() {
  const double tolerance = 0.15;
  std::size_t seeds_ok = 0;
  std::ostringstream detail;
  detail << "blocks per seed (untrained baseline):";
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SinusoidExperimentOptions o;
    o.seed = seed;
    const std::size_t untrained = decode_layer(sinusoid_network(o), 0, tolerance).blocks.blocks.size();
    const auto result = run_sinusoid_experiment(o);
    const std::size_t found = decode_layer(result.mlp, 0, tolerance).blocks.blocks.size();
    seeds_ok += found >= 3 ? 1 : 0;
    detail << ' ' << found << " (" << untrained << ")";
    std::cout << "  sinusoid seed " << seed << ": loss " << fmt(result.loss.front()) << " -> "
              << fmt(result.loss.back()) << ", " << found << " blocks below " << tolerance
              << " in layer 1" << std::endl;
  }
  detail << "; " << seeds_ok << "/5 seeds with >= 3";
  return {seeds_ok >= 3, detail.str()};
}

// ---------------------------------------------------------------------------
// 8. Pruning

PathSpec prune_path(std::size_t channels, std::string activation,
                    std::optional<ConversionSpec> conversion = {}) {
  PathSpec p;
  p.channels = channels;
  p.kernel = 3;
  p.activation = std::move(activation);
  p.conversion = conversion;
  return p;
}

BlockSpec full_block() {
  BlockSpec b;
  b.path(PathKind::RR) = prune_path(4, "ReLU");
  b.path(PathKind::RC) = prune_path(4, "Tanh", r2c_spec(ConversionKind::Cartesian));
  b.path(PathKind::CR) = prune_path(4, "cTanh", c2r_spec(ConversionKind::Mag));
  b.path(PathKind::CC) = prune_path(4, "cRecip");
  return b;
}

NetworkSpec both_spec(std::size_t blocks) {
  NetworkSpec s;
  s.input = IoDomain::Both;
  s.real_channels = 3;
  s.complex_channels = 2;
  s.heads.classes = 4;
  for (std::size_t i = 0; i < blocks; ++i) s.blocks.push_back(full_block());
  return s;
}

struct PruneSummary {
  std::size_t checked = 0;
  std::size_t idempotent = 0;
  std::size_t non_increasing = 0;
  std::size_t fixtures = 0;
  std::size_t fixtures_ok = 0;
  std::vector<nlohmann::json> outputs;
};

PruneSummary prune_suite() {
  PruneSummary r;
  Rng rng(8);
  std::bernoulli_distribution coin(0.6);
  for (int trial = 0; trial < 200; ++trial) {
    NetworkSpec s = both_spec(3);
    s.heads.real = coin(rng);
    s.heads.complex = !s.heads.real || coin(rng);
    for (auto& b : s.blocks)
      for (auto& p : b.paths)
        if (!coin(rng)) p.reset();
    bool nonempty = true;
    for (const auto& b : s.blocks) nonempty = nonempty && !b.empty();
    if (!nonempty) continue;
    try {
      validate(s);
    } catch (const Error&) {
      continue;
    }
    NetworkSpec p;
    try {
      p = prune_dependencies(s);
    } catch (const ConfigError&) {
      r.outputs.push_back("unreachable");
      continue;
    }
    ++r.checked;
    r.outputs.push_back(network_spec_to_json(p));
    r.idempotent += prune_dependencies(p) == p ? 1 : 0;
    r.non_increasing += count_parameters(p).total <= count_parameters(s).total ? 1 : 0;
  }

  auto fixture = [&](bool ok) {
    ++r.fixtures;
    r.fixtures_ok += ok ? 1 : 0;
  };
  {
    // Real chain with a complex branch nobody consumes.
    NetworkSpec s;
    s.input = IoDomain::Real;
    s.real_channels = 2;
    s.heads.complex = false;
    s.heads.classes = 3;
    BlockSpec b1, b2, b3;
    b1.path(PathKind::RR) = prune_path(4, "ReLU");
    b2.path(PathKind::RR) = prune_path(4, "ReLU");
    b2.path(PathKind::RC) = prune_path(4, "ReLU", r2c_spec(ConversionKind::Cartesian));
    b3.path(PathKind::RR) = prune_path(4, "ReLU");
    s.blocks = {b1, b2, b3};
    const NetworkSpec p = prune_dependencies(s);
    fixture(!p.blocks[1].path(PathKind::RC) && p.blocks[1].path(PathKind::RR) &&
            count_parameters(p).total < count_parameters(s).total);
  }
  {
    // Without a complex head the last block's complex producers are dead.
    NetworkSpec s = both_spec(3);
    s.heads.complex = false;
    const NetworkSpec p = prune_dependencies(s);
    fixture(!p.blocks[2].path(PathKind::RC) && !p.blocks[2].path(PathKind::CC) &&
            p.blocks[2].path(PathKind::RR) && p.blocks[2].path(PathKind::CR) &&
            p.blocks[0].path(PathKind::CC));
  }
  {
    // Complex paths fed by a domain that never arrives.
    NetworkSpec s;
    s.input = IoDomain::Real;
    s.real_channels = 2;
    s.heads.complex = false;
    s.heads.classes = 2;
    BlockSpec b1, b2;
    b1.path(PathKind::RR) = prune_path(3, "ReLU");
    b2.path(PathKind::RR) = prune_path(3, "ReLU");
    b2.path(PathKind::CR) = prune_path(3, "cTanh", c2r_spec(ConversionKind::Mag));
    b2.path(PathKind::CC) = prune_path(3, "cTanh");
    s.blocks = {b1, b2};
    const NetworkSpec p = prune_dependencies(s);
    fixture(!p.blocks[1].path(PathKind::CR) && !p.blocks[1].path(PathKind::CC) &&
            p.blocks[1].path(PathKind::RR));
  }
  {
    // Adapter without consumers.
    NetworkSpec s = both_spec(1);
    s.input = IoDomain::Complex;
    s.real_channels = 0;
    s.adapter = c2r_spec(ConversionKind::Cartesian);
    s.blocks[0].path(PathKind::RR).reset();
    s.blocks[0].path(PathKind::RC).reset();
    fixture(!prune_dependencies(s).adapter.has_value());
  }
  {
    // Fully live graph is left alone.
    const NetworkSpec s = both_spec(2);
    fixture(prune_dependencies(s) == s);
  }
  {
    // A required head that cannot be reached is reported.
    NetworkSpec s;
    s.input = IoDomain::Real;
    s.real_channels = 2;
    s.heads.real = false;
    BlockSpec b;
    b.path(PathKind::RR) = prune_path(2, "ReLU");
    s.blocks = {b};
    bool named = false;
    try {
      prune_dependencies(s);
    } catch (const ConfigError& e) {
      named = std::string(e.what()).find("complex output head") != std::string::npos;
    }
    fixture(named);
  }
  return r;
}

Outcome criterion_pruning() {
  const PruneSummary a = prune_suite();
  const PruneSummary b = prune_suite();
  const bool deterministic = a.outputs == b.outputs && a.checked == b.checked;
  const bool pass = deterministic && a.checked >= 20 && a.idempotent == a.checked &&
                    a.non_increasing == a.checked && a.fixtures_ok == a.fixtures;
  std::ostringstream d;
  d << a.checked << " random specs: " << a.idempotent << " idempotent, " << a.non_increasing
    << " non-increasing; fixtures " << a.fixtures_ok << "/" << a.fixtures << "; "
    << (deterministic ? "repeat run identical" : "repeat run differs");
  return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// 9. Search determinism and feasibility

std::vector<std::size_t> index_range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v(b - a);
  std::iota(v.begin(), v.end(), a);
  return v;
}

std::vector<nlohmann::json> trial_log(const SearchState& s) {
  std::vector<nlohmann::json> out;
  for (const auto& t : s.trials) out.push_back(trial_to_json(t, false));
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + HYBRIDNN_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

Outcome criterion_search() {
  ToyOptions opt;
  opt.count = 60;
  opt.channels = 3;
  opt.length = 8;
  opt.seed = 9;
  const InMemorySource src = make_toy_source(opt);
  const TrainingEvaluator ev(TaskData{&src, index_range(0, 40), index_range(40, 50),
                                      index_range(50, 60), 2});
  TaskSpec task;
  task.input = IoDomain::Real;
  task.output = IoDomain::Real;
  task.real_channels = 3;
  task.classes = 2;
  SearchConfig c;
  c.seed = 9;
  c.trials_per_phase = 3;
  c.space.min_blocks = 1;
  c.space.max_blocks = 3;
  c.space.channels = {2, 4};
  c.prototype.channels = 4;
  c.epochs = 2;
  c.batch_size = 16;
  c.selection_cap = 2;

  const SearchState a = run_search(task, c, ev);
  const SearchState b = run_search(task, c, ev);
  const bool deterministic = trial_log(a) == trial_log(b) &&
                             a.best_architecture == b.best_architecture &&
                             a.best_validation_loss == b.best_validation_loss;

  // Bounds spanning the fully connected candidates, so path removals can
  // fall below the minimum.
  std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0;
  for (std::size_t n = c.space.min_blocks; n <= c.space.max_blocks; ++n) {
    const std::size_t p = count_parameters(initial_architecture(task, c, n)).total;
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  SearchConfig bounded = c;
  bounded.constraints = {lo, hi};
  const SearchState s = run_search(task, bounded, ev);
  std::size_t accepted = 0, in_bounds = 0, constraint_pruned = 0;
  for (const auto& t : s.trials) {
    if (t.note == "constraint") ++constraint_pruned;
    if (t.phase <= Phase::BlockNumber || t.status != TrialStatus::Complete) continue;
    ++accepted;
    const std::size_t counted = count_parameters(t.architecture).total;
    in_bounds += counted == t.param_count && bounded.constraints.satisfied(counted) ? 1 : 0;
  }
  const std::size_t best_count = count_parameters(s.best_architecture).total;
  const bool best_ok = bounded.constraints.satisfied(best_count) && best_count == s.best_param_count;

  // Infeasible bounds through the command line.
  const fs::path dir = fs::temp_directory_path() / ("hybridnn_acceptance_" + std::to_string(getpid()));
  fs::create_directories(dir);
  const nlohmann::json cfg = {
      {"search",
       {{"trials_per_phase", 1}, {"epochs", 1}, {"batch_size", 8},
        {"space", {{"min_blocks", 1}, {"max_blocks", 1}, {"channels", {2}}}}}},
      {"toy", {{"count", 40}, {"channels", 2}, {"length", 6}}}};
  std::ofstream(dir / "config.json") << cfg.dump(2);
  const int code = run_cli("--seed 1 --config \"" + (dir / "config.json").string() + "\" --out \"" +
                           (dir / "search").string() + "\" search --task toy --max-params 10");
  fs::remove_all(dir);

  const bool pass = deterministic && accepted > 0 && in_bounds == accepted && best_ok && code == 4;
  std::ostringstream d;
  d << (deterministic ? "repeat run identical (" : "repeat run differs (") << a.trials.size()
    << " trials); bounds [" << lo << ", " << hi << "]: " << in_bounds << "/" << accepted
    << " accepted trials in bounds, " << constraint_pruned << " rejected by constraint, best "
    << best_count << "; infeasible CLI exit code " << code;
  return {pass, d.str()};
}

// ---------------------------------------------------------------------------
// 10-11. Spoken digits

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Hyperparams audio_hyperparams() {
  Hyperparams hp;
  hp.epochs = 12;
  hp.batch_size = 32;
  hp.learning_rate = 3e-3;
  return hp;
}

AudioDataConfig digit_config(double snr_db) {
  AudioDataConfig c;
  c.synthetic.count = 2000;
  c.pipeline.snr_db = snr_db;
  return c;
}

struct AudioRuns {
  std::optional<Network> hnn_seed0;
  AudioDataConfig config;
};

AudioRuns audio_runs;

std::string seconds_since(std::chrono::steady_clock::time_point t) {
  return fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count(), 3) + " s";
}

Outcome criterion_hnn_vs_rvnn() {
  audio_runs.config = digit_config(0.0);
  const AudioTask task = make_audio_task(audio_runs.config);
  const NetworkSpec hnn_spec = audio_hnn_spec();
  const std::size_t hnn_params = count_parameters(hnn_spec).total;
  const NetworkSpec rvnn_spec = audio_rvnn_spec(hnn_params);
  const std::size_t rvnn_params = count_parameters(rvnn_spec).total;
  const double ratio = static_cast<double>(rvnn_params) / static_cast<double>(hnn_params);
  const Hyperparams hp = audio_hyperparams();
  std::vector<double> hnn_loss, rvnn_loss;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    for (const bool hybrid : {true, false}) {
      const auto start = std::chrono::steady_clock::now();
      TrainedModel m = train_audio_model(hybrid ? hnn_spec : rvnn_spec, task, hp, seed);
      (hybrid ? hnn_loss : rvnn_loss).push_back(m.report.test_loss);
      std::cout << "  " << (hybrid ? "HNN " : "RVNN") << " seed " << seed << ": test loss "
                << fmt(m.report.test_loss) << ", accuracy " << fmt(m.report.test_accuracy)
                << " (" << seconds_since(start) << ")" << std::endl;
      if (hybrid && seed == 0) audio_runs.hnn_seed0.emplace(std::move(m.network));
    }
  }
  const double mh = median(hnn_loss), mr = median(rvnn_loss);
  const bool matched = std::abs(ratio - 1.0) <= 0.10;
  std::ostringstream d;
  d << task.source->size() << " clips at 0 dB, " << hp.epochs << " epochs; parameters HNN "
    << hnn_params << " RVNN " << rvnn_params << " (ratio " << fmt(ratio) << "); median test CE HNN "
    << fmt(mh) << " RVNN " << fmt(mr);
  return {matched && mh <= mr, d.str()};
}

// Optional full-dataset comparison in the three noise conditions.
void optional_full_dataset_run() {
  const char* root = std::getenv("HYBRIDNN_AUDIOMNIST_ROOT");
  if (root == nullptr || !fs::is_directory(root)) {
    std::cout << "  full spoken-digit dataset not present; extended comparison skipped" << std::endl;
    return;
  }
  std::vector<RunRecord> runs;
  for (const double snr : {std::numeric_limits<double>::infinity(), 0.0, -5.0}) {
    AudioDataConfig c = digit_config(snr);
    c.kind = AudioDataKind::AudioMnist;
    c.root = root;
    const AudioTask task = make_audio_task(c);
    const NetworkSpec hs = audio_hnn_spec();
    const NetworkSpec rs = audio_rvnn_spec(count_parameters(hs).total);
    const std::string condition = std::isinf(snr) ? "No noise" : fmt(snr) + " dB";
    for (const auto& [name, spec] : {std::pair{"HNN", hs}, std::pair{"RVNN", rs}}) {
      const TrainedModel m = train_audio_model(spec, task, audio_hyperparams(), 0);
      runs.push_back({condition, snr, name, m.report.test_loss, m.report.test_accuracy,
                      m.report.parameters, 0});
    }
  }
  write_text("audio_comparison.csv", comparison_csv(runs));
  std::cout << comparison_markdown(runs);
}

Outcome criterion_crop() {
  if (!audio_runs.hnn_seed0) {
    audio_runs.config = digit_config(0.0);
    const AudioTask task = make_audio_task(audio_runs.config);
    audio_runs.hnn_seed0.emplace(
        train_audio_model(audio_hnn_spec(), task, audio_hyperparams(), 0).network);
  }
  AudioDataConfig c = audio_runs.config;
  c.pipeline.crop.reset();
  c.pipeline.random_shift = false;
  const AudioTask task = make_audio_task(c);
  Network& net = *audio_runs.hnn_seed0;
  const auto& idx = task.split.test;
  const Evaluation base = evaluate(net, *task.source, idx);
  const auto ratios = crop_ratios();
  const auto points = crop_sweep(net, *task.source, idx, ratios);

  bool grid = points.size() == 17;
  for (std::size_t i = 0; grid && i < points.size(); ++i) {
    grid = std::abs(points[i].ratio - (-0.8 + 0.1 * static_cast<double>(i))) < 1e-12;
  }
  const CropPoint* zero = nullptr;
  for (const auto& p : points)
    if (p.ratio == 0.0) zero = &p;
  const bool exact = zero != nullptr && zero->accuracy == base.accuracy && zero->loss == base.loss;
  const bool degraded = grid && points.front().accuracy < base.accuracy &&
                        points.back().accuracy < base.accuracy;
  std::ostringstream d;
  d << "baseline accuracy " << fmt(base.accuracy) << "; crop(0) "
    << (zero ? fmt(zero->accuracy) : std::string("missing")) << "; crop(-0.8) "
    << fmt(points.front().accuracy) << "; crop(+0.8) " << fmt(points.back().accuracy) << "; "
    << points.size() << " ratios" << (grid ? " on the 0.1 grid" : " off the 0.1 grid");
  std::cout << crop_curve_csv(points);
  return {grid && exact && degraded, d.str()};
}

// ---------------------------------------------------------------------------
// 12. STFT

Outcome criterion_stft() {
  const StftOptions opt;
  const std::size_t n_fft = opt.n_fft, hop = opt.hop, len = kSampleRate;
  Rng rng(12);
  std::normal_distribution<double> g;
  std::vector<double> noise(len);
  for (auto& v : noise) v = g(rng);
  const Tensor spec = stft(noise, opt);
  const bool shape_ok = spec.shape() == Shape{481, 99};

  std::vector<double> tone(len);
  for (std::size_t n = 0; n < len; ++n) tone[n] = std::sin(2.0 * kPi * 1000.0 * n / kSampleRate);
  const Tensor ts = stft(tone, opt);
  const std::size_t bins = ts.extent(0), frames = ts.extent(1);
  std::size_t peak = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < bins; ++k) {
    double e = 0.0;
    for (std::size_t f = 0; f < frames; ++f) e += std::abs(ts.complex_data()[k * frames + f]);
    if (e > best) {
      best = e;
      peak = k;
    }
  }

  // Inverse DFT per frame, overlap-add, divide by the summed window.
  std::vector<double> cosines(n_fft), sines(n_fft);
  for (std::size_t m = 0; m < n_fft; ++m) {
    cosines[m] = std::cos(2.0 * kPi * m / n_fft);
    sines[m] = std::sin(2.0 * kPi * m / n_fft);
  }
  std::vector<double> window(n_fft);
  for (std::size_t m = 0; m < n_fft; ++m) window[m] = 0.5 - 0.5 * cosines[m];
  const std::size_t nf = spec.extent(1), nb = spec.extent(0);
  std::vector<double> out(len, 0.0), weight(len, 0.0);
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t n = 0; n < n_fft; ++n) {
      double acc = spec.complex_data()[f].real();
      acc += spec.complex_data()[(nb - 1) * nf + f].real() * (n % 2 ? -1.0 : 1.0);
      for (std::size_t k = 1; k + 1 < nb; ++k) {
        const cplx X = spec.complex_data()[k * nf + f];
        const std::size_t m = (k * n) % n_fft;
        acc += 2.0 * (X.real() * cosines[m] - X.imag() * sines[m]);
      }
      out[f * hop + n] += acc / static_cast<double>(n_fft);
      weight[f * hop + n] += window[n];
    }
  }
  double err = 0.0;
  for (std::size_t n = n_fft; n + n_fft < len; ++n) {
    err = std::max(err, std::abs(out[n] / weight[n] - noise[n]));
  }
  const bool pass = shape_ok && peak == 20 && err < 1e-8;
  return {pass, "shape " + shape_to_string(spec.shape()) + ", 1 kHz peak at bin " +
                    std::to_string(peak) + ", interior reconstruction error " + sci(err)};
}

// ---------------------------------------------------------------------------

struct Criterion {
  int id;
  std::string title;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace hnn

int main(int argc, char** argv) {
  using namespace hnn;
  const std::vector<Criterion> all = {
      {1, "gradient correctness", criterion_gradients},
      {2, "complex conv equivalence", criterion_conv_equivalence},
      {3, "conversion round trips", criterion_round_trips},
      {4, "activation shape fidelity", criterion_activation_shapes},
      {5, "activation preset table", criterion_preset_table},
      {6, "parameter counting", criterion_parameter_count},
      {7, "sinusoid complex blocks", criterion_sinusoid},
      {8, "pruning invariants", criterion_pruning},
      {9, "search determinism and feasibility", criterion_search},
      {10, "HNN vs RVNN at 0 dB", criterion_hnn_vs_rvnn},
      {11, "time truncation harness", criterion_crop},
      {12, "STFT pipeline", criterion_stft},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title
              << "): " << o.detail << " [" << seconds_since(start) << "]" << std::endl;
    if (c.id == 10) optional_full_dataset_run();
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
