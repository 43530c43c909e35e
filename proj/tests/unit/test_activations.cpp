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


#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "hybridnn/activations.hpp"
#include "hybridnn/errors.hpp"
#include "hybridnn/ops.hpp"
#include "test_util.hpp"

namespace hnn {
namespace {

using testing::gradient_check;

cplx eval(const ActivationSpec& spec, cplx z) {
  return activate(spec, Var(Tensor::scalar(z))).value().item();
}

TEST(Activations, GoldenPresetTable) {
  std::ifstream in(HYBRIDNN_GOLDEN_DIR "/table1_presets.json");
  ASSERT_TRUE(in.good());
  const auto golden = nlohmann::json::parse(in);
  const auto& rows = golden.at("rows");
  ASSERT_EQ(rows.size(), 8u);
  auto value = [](const nlohmann::json& cell) {
    return cell.is_null() ? 0.0 : cell.get<double>();
  };
  for (const auto& row : rows) {
    const auto spec = preset(row[0].get<std::string>());
    SCOPED_TRACE(spec.name);
    EXPECT_EQ(to_string(spec.family), row[1].get<std::string>());
    EXPECT_EQ(spec.q, static_cast<int>(value(row[2])));
    EXPECT_EQ(spec.alpha, cplx(value(row[3]), 0));
    for (int n = 0; n < 4; ++n) EXPECT_EQ(spec.k[n], cplx(value(row[4 + n]), 0));
    EXPECT_EQ(spec.epsilon, value(row[8]));
  }
}

TEST(Activations, ListPresets) {
  const auto all = list_presets();
  ASSERT_EQ(all.size(), 9u);
  EXPECT_EQ(all.back().family, ActivationFamily::None);
  const auto rm = preset("cRecipMax");
  EXPECT_EQ(rm.q, 2);
  EXPECT_EQ(rm.alpha, cplx(0.9));
  EXPECT_EQ(rm.k[0], cplx(0.1));
  EXPECT_EQ(rm.k[1], cplx(0.5));
  EXPECT_EQ(rm.epsilon, 0.1);
  const auto sp = preset("cSoftPlus");
  EXPECT_EQ(sp.k[0], cplx(2.134));
  EXPECT_EQ(sp.epsilon, 9.481);
  EXPECT_THROW(preset("crelu"), ConfigError);
}

TEST(Activations, HandEvaluatedExamples) {
  EXPECT_NEAR(eval(preset("cTanh"), 1.0).real(), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(eval(preset("cReLU"), 2.0).real(), 1.0 + 0.5 * 4.0 / 2.01, 1e-12);
  EXPECT_NEAR(eval(preset("cReLU"), 2.0).real(), 1.99502, 1e-5);
  EXPECT_NEAR(eval(preset("cReLU"), -2.0).real(), -1.0 + 0.5 * 4.0 / 2.01, 1e-12);
  EXPECT_NEAR(std::abs(eval(preset("cReLU"), -2.0)), 0.004975, 1e-6);
  EXPECT_NEAR(eval(preset("cAbs"), -2.0).real(), 4.0 / 2.01, 1e-12);
  const double surrogate = eval(elu_surrogate(), -1.0).real();
  EXPECT_NEAR(surrogate, -0.373 + (-1.0) * (1.513 - 0.627) / (1.0 + 2.411), 1e-12);
  EXPECT_NEAR(surrogate, -0.6328, 1e-3);
  EXPECT_NEAR(std::expm1(-1.0), -0.63212, 1e-5);
}

TEST(Activations, FamilyDAndE) {
  const auto d = preset("cReImLU");
  // v > 0: factor 1 - 0.95 + 0.95 = 1.
  EXPECT_NEAR(std::abs(eval(d, cplx(2.0, 0.5)) - cplx(2.0, 0.5)), 0, 1e-15);
  // v = 0: factor 0.05.
  EXPECT_NEAR(std::abs(eval(d, cplx(-1.0, 0.5)) - 0.05 * cplx(-1.0, 0.5)), 0, 1e-15);
  const auto e = preset("cRecipMax");
  const cplx z(1.5, 0.4);
  const double v = 1.5 - 0.5 * 0.4 - 0.1;
  const cplx expected = z * (0.1 + 0.9 * v * v / (std::norm(z) + 0.1));
  EXPECT_NEAR(std::abs(eval(e, z) - expected), 0, 1e-14);
}

TEST(Activations, RealNamed) {
  auto r = [](const char* name, double x) {
    return activate_real(name, Var(Tensor::scalar(x))).value().item_real();
  };
  EXPECT_EQ(r("ReLU", -3), 0.0);
  EXPECT_EQ(r("Tanhshrink", 0), 0.0);
  EXPECT_NEAR(r("Softplus", 0), std::log(2.0), 1e-15);
  EXPECT_EQ(r("Abs", -1.5), 1.5);
  EXPECT_NEAR(r("Tanh", 0.5), std::tanh(0.5), 1e-15);
  EXPECT_THROW(r("Swish", 0), ConfigError);
  EXPECT_THROW(activate_real("ReLU", Var(Tensor::scalar(cplx(1, 1)))), ShapeError);
}

TEST(Activations, PhaseEquivarianceAndBoundedTanh) {
  Rng rng(31);
  std::uniform_real_distribution<double> r(0.01, 20), th(-3.1, 3.1);
  for (const char* name : {"cRecip", "cTanh"}) {
    for (int i = 0; i < 500; ++i) {
      const cplx z = std::polar(r(rng), th(rng));
      const cplx out = eval(preset(name), z);
      EXPECT_NEAR(std::arg(out), std::arg(z), 1e-12);
      if (std::string(name) == "cTanh") EXPECT_LT(std::abs(out), 1.0);
    }
  }
}

TEST(Activations, RealAxisClosure) {
  for (const auto& spec : list_presets()) {
    for (double x = -3; x <= 3; x += 0.25) {
      EXPECT_LT(std::abs(eval(spec, x).imag()), 1e-12) << spec.name;
    }
  }
}

TEST(Activations, ShapeFidelity) {
  double relu_dev = 0, abs_dev = 0, elu_dev = 0;
  for (int i = -300; i <= 300; ++i) {
    const double x = i * 0.01;
    relu_dev = std::max(relu_dev, std::abs(eval(preset("cReLU"), x).real() - std::max(x, 0.0)));
    abs_dev = std::max(abs_dev, std::abs(eval(preset("cAbs"), x).real() - std::abs(x)));
    const double elu = x > 0 ? x : std::expm1(x);
    elu_dev = std::max(elu_dev, std::abs(eval(elu_surrogate(), x).real() - elu));
  }
  EXPECT_LT(relu_dev, 0.05);
  EXPECT_LT(abs_dev, 0.05);
  EXPECT_LT(elu_dev, 0.05);
}

TEST(Activations, FamilyETendsToIdentity) {
  auto spec = preset("cRecipMax");
  const cplx z(0.8, -1.1);
  double previous = INFINITY;
  for (double alpha : {0.5, 0.1, 0.01, 0.001}) {
    spec.alpha = alpha;
    const double dev = std::abs(eval(spec, z) - z);
    EXPECT_LT(dev, previous);
    previous = dev;
  }
  EXPECT_LT(previous, 1e-2);
}

TEST(Activations, Validation) {
  auto spec = preset("cTanh");
  spec.epsilon = 0;
  EXPECT_THROW(activate(spec, Var(Tensor::scalar(1.0))), ConfigError);
  auto d = preset("cReImLU");
  d.alpha = 1.5;
  EXPECT_THROW(validate(d), ConfigError);
  EXPECT_THROW(activation_by_name("nope"), ConfigError);
  EXPECT_EQ(activation_by_name("ELUApprox").family, ActivationFamily::P);
}

TEST(Activations, JsonRoundTrip) {
  for (const auto& spec : list_presets()) {
    const auto back = activation_from_json(activation_to_json(spec));
    EXPECT_EQ(back.name, spec.name);
    EXPECT_EQ(back.family, spec.family);
    EXPECT_EQ(back.k, spec.k);
    EXPECT_EQ(back.alpha, spec.alpha);
    EXPECT_EQ(back.epsilon, spec.epsilon);
    EXPECT_EQ(back.q, spec.q);
  }
}

// Samples with |z| in [0.3, 2] and v kept at least 0.05 away from its kink.
TEST(Activations, GradientsOfEveryPreset) {
  Rng rng(32);
  std::uniform_real_distribution<double> r(0.3, 2.0), th(-3.0, 3.0);
  auto specs = list_presets();
  specs.push_back(elu_surrogate());
  for (const auto& spec : specs) {
    Tensor z({6}, DType::Complex128);
    for (auto& v : z.complex_data()) {
      for (;;) {
        v = std::polar(r(rng), th(rng));
        const double t = v.real() - spec.k[1].real() * std::abs(v.imag()) - spec.k[0].real();
        if (std::abs(t) > 0.05) break;
      }
    }
    Var p = Var::parameter(z);
    EXPECT_LT(gradient_check([&] { return activate(spec, p); }, {p}), 1e-5) << spec.name;
  }
  for (const auto& name : real_activation_names()) {
    Var x = Var::parameter(Tensor::real({4}, {-1.3, -0.4, 0.6, 1.7}));
    EXPECT_LT(gradient_check([&] { return activate_real(name, x); }, {x}), 1e-5) << name;
  }
}

}  // namespace
}  // namespace hnn
