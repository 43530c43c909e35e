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
#include <numeric>

#include "hybridnn/datasets.hpp"
#include "hybridnn/errors.hpp"
#include "hybridnn/training.hpp"

namespace hnn {
namespace {

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v(hi - lo);
  std::iota(v.begin(), v.end(), lo);
  return v;
}

NetworkSpec small_real_net(std::size_t channels, std::size_t classes) {
  NetworkSpec s;
  s.input = IoDomain::Real;
  s.real_channels = channels;
  s.heads.complex = false;
  s.heads.classes = classes;
  BlockSpec b;
  PathSpec p;
  p.channels = 4;
  p.kernel = 3;
  p.activation = "ReLU";
  b.path(PathKind::RR) = p;
  s.blocks.push_back(b);
  return s;
}

TEST(Training, SeparableToyReachesFullTrainAccuracy) {
  ToyOptions opt;
  opt.count = 100;
  opt.seed = 3;
  const InMemorySource src = make_toy_source(opt);
  TaskData data{&src, range(0, 80), range(80, 90), range(90, 100), 2};
  Network net(small_real_net(opt.channels, 2), 1);
  Hyperparams hp;
  hp.learning_rate = 1e-2;
  hp.epochs = 200;
  hp.batch_size = 16;
  std::size_t reached = 0;
  const auto report = train(net, data, hp, [&](std::size_t epoch, double) {
    if (evaluate(net, src, data.train).accuracy >= 0.99) {
      reached = epoch;
      return false;
    }
    return true;
  });
  EXPECT_GT(reached, 0u);
  EXPECT_LE(reached, 200u);
  EXPECT_TRUE(report.stopped_early);
  EXPECT_GE(evaluate(net, src, data.train).accuracy, 0.99);
}

TEST(Training, ZeroEpochsReportsInitialLossesOnly) {
  const InMemorySource src = make_toy_source({});
  TaskData data{&src, range(0, 150), range(150, 175), range(175, 200), 2};
  Network net(small_real_net(4, 2), 2);
  Hyperparams hp;
  hp.epochs = 0;
  const auto report = train(net, data, hp);
  EXPECT_EQ(report.train_loss.size(), 1u);
  EXPECT_EQ(report.val_loss.size(), 1u);
  EXPECT_EQ(report.epochs_run, 0u);
  EXPECT_GT(report.parameters, 0u);
}

TEST(Training, SameSeedGivesIdenticalCurves) {
  ToyOptions opt;
  opt.domain = IoDomain::Both;
  const InMemorySource src = make_toy_source(opt);
  TaskData data{&src, range(0, 150), range(150, 175), range(175, 200), 2};
  NetworkSpec spec = make_prototype(IoDomain::Both, 4, 4, 2, {.blocks = 1, .channels = 4});
  for (auto& p : spec.blocks[0].paths) p->dropout = 0.1;
  Hyperparams hp;
  hp.epochs = 3;
  hp.seed = 17;
  Network a(spec, 5), b(spec, 5);
  const auto ra = train(a, data, hp), rb = train(b, data, hp);
  EXPECT_EQ(ra.train_loss, rb.train_loss);
  EXPECT_EQ(ra.val_loss, rb.val_loss);
  EXPECT_EQ(ra.test_loss, rb.test_loss);
}

TEST(Training, NonFiniteLossAborts) {
  std::vector<Example> ex;
  for (int i = 0; i < 8; ++i) {
    Example e;
    e.real = Tensor::full({4, 8}, i == 3 ? NAN : 1.0);
    e.label = i % 2;
    ex.push_back(e);
  }
  const InMemorySource src(ex);
  TaskData data{&src, range(0, 8), {}, {}, 2};
  Network net(small_real_net(4, 2), 1);
  Hyperparams hp;
  hp.epochs = 1;
  EXPECT_THROW(train(net, data, hp), NumericError);
}

TEST(Training, RejectsEmptyTrainSplitAndBadHyperparams) {
  const InMemorySource src = make_toy_source({});
  Network net(small_real_net(4, 2), 1);
  EXPECT_THROW(train(net, TaskData{&src, {}, {}, {}, 2}, {}), DataError);
  Hyperparams hp;
  hp.learning_rate = -1;
  EXPECT_THROW(train(net, TaskData{&src, range(0, 10), {}, {}, 2}, hp), ConfigError);
}

TEST(Training, HyperparamJsonRoundTrip) {
  Hyperparams hp;
  hp.learning_rate = 3e-4;
  hp.epochs = 7;
  hp.batch_size = 5;
  hp.optimizer = OptimizerKind::Sgd;
  hp.seed = 99;
  const auto back = hyperparams_from_json(hyperparams_to_json(hp));
  EXPECT_EQ(back.learning_rate, hp.learning_rate);
  EXPECT_EQ(back.epochs, hp.epochs);
  EXPECT_EQ(back.batch_size, hp.batch_size);
  EXPECT_EQ(back.optimizer, hp.optimizer);
  EXPECT_EQ(back.seed, hp.seed);
}

TEST(Training, RegressionLossDecreases) {
  const auto ds = generate_sinusoid_dataset(256, 4);
  Rng rng(1);
  Mlp mlp(Domain::Real, 36, {18, 3}, "ELU", rng);
  Hyperparams hp;
  hp.learning_rate = 3e-3;
  hp.epochs = 20;
  hp.batch_size = 32;
  const auto curve = train_regression(mlp, ds.predictors, ds.targets, hp);
  ASSERT_EQ(curve.size(), 21u);
  EXPECT_LT(curve.back(), 0.5 * curve.front());
}

}  // namespace
}  // namespace hnn
