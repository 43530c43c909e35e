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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "hybridnn/datasets.hpp"
#include "hybridnn/errors.hpp"
#include "hybridnn/nas.hpp"

namespace hnn {
namespace {

std::size_t live_path_count(const NetworkSpec& s) {
  std::size_t n = 0;
  for (const auto& b : s.blocks) {
    for (auto k : kAllPaths) n += b.path(k) ? 1 : 0;
  }
  return n;
}

// Reports a short curve through the callback so the pruner gets exercised.
EvalResult curve_result(double loss, const EpochCallback& cb) {
  EvalResult r;
  for (std::size_t e = 0; e < 3; ++e) {
    const double v = loss + 0.1 * static_cast<double>(2 - e);
    r.curve.push_back(v);
    if (cb && !cb(e, v)) {
      r.stopped_early = true;
      break;
    }
  }
  r.validation_loss = loss;
  return r;
}

FunctionEvaluator surrogate(std::function<double(const NetworkSpec&, const Hyperparams&)> f,
                            bool report_curve = false) {
  return FunctionEvaluator([f, report_curve](const NetworkSpec& s, const Hyperparams& hp,
                                             const EpochCallback& cb) {
    const double loss = f(s, hp);
    if (report_curve) return curve_result(loss, cb);
    return EvalResult{loss, {loss}, false};
  });
}

// Mildly informative surrogate: depends on the whole architecture so that
// every phase sees distinct losses.
double structural_loss(const NetworkSpec& s, const Hyperparams& hp) {
  const double params = static_cast<double>(count_parameters(s).total);
  return 1.0 + 0.1 * std::abs(std::log10(params) - 3.0) +
         0.05 * std::abs(std::log10(hp.learning_rate) + 2.5) +
         0.01 * static_cast<double>(live_path_count(s));
}

TaskSpec both_task() {
  TaskSpec t;
  t.input = IoDomain::Both;
  t.output = IoDomain::Real;
  t.real_channels = 3;
  t.complex_channels = 2;
  t.classes = 3;
  return t;
}

SearchConfig small_config(std::uint64_t seed = 11) {
  SearchConfig c;
  c.seed = seed;
  c.trials_per_phase = 4;
  c.space.min_blocks = 1;
  c.space.max_blocks = 3;
  c.space.channels = {2, 4};
  c.prototype.channels = 4;
  return c;
}

std::vector<nlohmann::json> trial_log(const SearchState& s) {
  std::vector<nlohmann::json> out;
  for (const auto& t : s.trials) out.push_back(trial_to_json(t, false));
  return out;
}

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v(b - a);
  std::iota(v.begin(), v.end(), a);
  return v;
}

TEST(Nas, TrainingSearchIsDeterministic) {
  ToyOptions opt;
  opt.count = 60;
  opt.channels = 3;
  opt.length = 8;
  const InMemorySource src = make_toy_source(opt);
  TrainingEvaluator ev(TaskData{&src, range(0, 40), range(40, 50), range(50, 60), 2});
  TaskSpec task;
  task.input = IoDomain::Real;
  task.output = IoDomain::Real;
  task.real_channels = 3;
  task.classes = 2;
  SearchConfig c = small_config(3);
  c.trials_per_phase = 2;
  c.space.max_blocks = 2;
  c.epochs = 2;
  c.batch_size = 16;
  c.selection_cap = 1;
  const SearchState a = run_search(task, c, ev);
  const SearchState b = run_search(task, c, ev);
  EXPECT_EQ(trial_log(a), trial_log(b));
  EXPECT_EQ(a.best_architecture, b.best_architecture);
  EXPECT_EQ(a.best_validation_loss, b.best_validation_loss);
  EXPECT_TRUE(std::isfinite(a.best_validation_loss));
}

TEST(Nas, ThreadedRunMatchesSerialRun) {
  const auto ev = surrogate(structural_loss, true);
  SearchConfig c = small_config(5);
  const SearchState serial = run_search(both_task(), c, ev);
  c.threads = 3;
  const SearchState threaded = run_search(both_task(), c, ev);
  EXPECT_EQ(trial_log(serial), trial_log(threaded));
  EXPECT_EQ(serial.best_architecture, threaded.best_architecture);
}

TEST(Nas, DifferentSeedsExploreDifferently) {
  const auto ev = surrogate(structural_loss);
  const SearchState a = run_search(both_task(), small_config(1), ev);
  const SearchState b = run_search(both_task(), small_config(2), ev);
  EXPECT_NE(trial_log(a), trial_log(b));
}

TEST(Nas, InfeasibleConstraintsRaiseWithClosestTrial) {
  const auto ev = surrogate(structural_loss);
  SearchConfig c = small_config();
  c.constraints.max_params = 10;
  try {
    run_search(both_task(), c, ev);
    FAIL() << "expected InfeasibleSearchError";
  } catch (const InfeasibleSearchError& e) {
    ASSERT_TRUE(e.best_infeasible.has_value());
    EXPECT_GT(e.best_infeasible->param_count, 10u);
    EXPECT_FALSE(c.constraints.satisfied(e.best_infeasible->param_count));
  }
}

TEST(Nas, InfeasibleErrorIsAlsoAnError) {
  const auto ev = surrogate(structural_loss);
  SearchConfig c = small_config();
  c.constraints.min_params = 1'000'000'000;
  EXPECT_THROW(run_search(both_task(), c, ev), Error);
}

TEST(Nas, AcceptedArchitecturesRespectParameterBounds) {
  const auto ev = surrogate(structural_loss);
  SearchConfig c = small_config(7);
  const SearchState free_run = run_search(both_task(), c, ev);
  // Bounds around the unconstrained optimum force the search to trade loss for size.
  c.constraints.min_params = 50;
  c.constraints.max_params = std::max<std::size_t>(60, free_run.best_param_count / 2);
  const SearchState s = run_search(both_task(), c, ev);
  EXPECT_TRUE(c.constraints.satisfied(s.best_param_count));
  EXPECT_EQ(s.best_param_count, count_parameters(s.best_architecture).total);
  for (const auto& t : s.trials) {
    if (t.status == TrialStatus::Complete && t.phase != Phase::Customisation &&
        t.phase != Phase::BlockNumber) {
      EXPECT_TRUE(c.constraints.satisfied(t.param_count)) << t.trial_id;
    }
    if (t.note == "constraint") EXPECT_FALSE(c.constraints.satisfied(t.param_count));
  }
}

TEST(Nas, RealTargetDropsComplexHeadInCustomisation) {
  const auto ev = surrogate(structural_loss);
  TaskSpec task;
  task.input = IoDomain::Complex;
  task.output = IoDomain::Real;
  task.complex_channels = 4;
  task.classes = 2;
  const SearchState s = run_search(task, small_config(), ev);
  ASSERT_FALSE(s.trials.empty());
  EXPECT_EQ(s.trials.front().phase, Phase::Customisation);
  EXPECT_FALSE(s.trials.front().architecture.heads.complex);
  EXPECT_TRUE(s.trials.front().architecture.heads.real);
  EXPECT_FALSE(s.best_architecture.heads.complex);
  const auto& last = s.best_architecture.blocks.back();
  EXPECT_FALSE(last.path(PathKind::RC).has_value());
  EXPECT_FALSE(last.path(PathKind::CC).has_value());
}

TEST(Nas, SingletonBlockRangeSkipsBlockTrials) {
  const auto ev = surrogate(structural_loss);
  SearchConfig c = small_config();
  c.space.min_blocks = c.space.max_blocks = 2;
  const SearchState s = run_search(both_task(), c, ev);
  for (const auto& t : s.trials) EXPECT_NE(t.phase, Phase::BlockNumber);
  EXPECT_EQ(s.best_architecture.blocks.size(), 2u);
}

TEST(Nas, MonotoneSurrogatePicksDeepestNetwork) {
  const auto ev = surrogate([](const NetworkSpec& s, const Hyperparams&) {
    return 1.0 / static_cast<double>(s.blocks.size());
  });
  SearchConfig c = small_config();
  c.space.min_blocks = 2;
  c.space.max_blocks = 6;
  c.trials_per_phase = 3;
  const SearchState s = run_search(both_task(), c, ev);
  std::vector<std::size_t> tried;
  for (const auto& t : s.trials) {
    if (t.phase == Phase::BlockNumber) tried.push_back(t.architecture.blocks.size());
  }
  EXPECT_EQ(tried, (std::vector<std::size_t>{2, 4, 6}));
  EXPECT_EQ(s.best_architecture.blocks.size(), 6u);
}

TEST(Nas, BlockGridCoversWholeRangeWhenBudgetAllows) {
  const auto ev = surrogate(structural_loss);
  SearchConfig c = small_config();
  c.space.min_blocks = 1;
  c.space.max_blocks = 3;
  c.trials_per_phase = 8;
  const SearchState s = run_search(both_task(), c, ev);
  std::vector<std::size_t> tried;
  for (const auto& t : s.trials) {
    if (t.phase == Phase::BlockNumber) tried.push_back(t.architecture.blocks.size());
  }
  EXPECT_EQ(tried, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Nas, PhasesFollowTheFixedOrder) {
  const auto ev = surrogate(structural_loss);
  const SearchConfig c = small_config(9);
  const SearchState s = run_search(both_task(), c, ev);
  const auto& h = s.phase_history;
  ASSERT_GE(h.size(), 7u);
  EXPECT_EQ(h[0], Phase::Customisation);
  EXPECT_EQ(h[1], Phase::BlockNumber);
  std::size_t i = 2, loops = 0;
  while (i + 1 < h.size() && h[i] == Phase::InputSelection) {
    EXPECT_EQ(h[i + 1], Phase::DependencyCheck);
    i += 2;
    ++loops;
  }
  EXPECT_GE(loops, 1u);
  EXPECT_EQ(loops, s.selection_iterations);
  EXPECT_LE(s.selection_iterations, c.selection_cap);
  ASSERT_EQ(h.size(), i + 4);
  EXPECT_EQ(h[i], Phase::StructureRefinement);
  EXPECT_EQ(h[i + 1], Phase::ActivationDCChoice);
  EXPECT_EQ(h[i + 2], Phase::HyperparameterChoice);
  EXPECT_EQ(h[i + 3], Phase::Done);
  EXPECT_EQ(s.phase, Phase::Done);
}

TEST(Nas, SelectionCapBoundsIterations) {
  // Every removal looks slightly better, so the loop would keep going.
  const auto ev = surrogate([](const NetworkSpec& s, const Hyperparams&) {
    return 1.0 + 0.01 * static_cast<double>(live_path_count(s));
  });
  SearchConfig c = small_config();
  c.space.min_blocks = c.space.max_blocks = 3;
  c.selection_cap = 2;
  const SearchState s = run_search(both_task(), c, ev);
  EXPECT_EQ(s.selection_iterations, 2u);
}

TEST(Nas, TrialIdsAndOrderAreSequential) {
  const auto ev = surrogate(structural_loss);
  const SearchState s = run_search(both_task(), small_config(), ev);
  for (std::size_t i = 0; i < s.trials.size(); ++i) EXPECT_EQ(s.trials[i].trial_id, i);
  for (std::size_t i = 1; i < s.trials.size(); ++i) {
    EXPECT_LE(static_cast<int>(s.trials[i - 1].phase), static_cast<int>(s.trials[i].phase) + 1);
  }
}

TEST(Nas, FirstInputSelectionOffersAllPathsAndNoComplexPaths) {
  const auto ev = surrogate(structural_loss);
  const SearchState s = run_search(both_task(), small_config(), ev);
  bool all = false, no_cc = false;
  for (const auto& t : s.trials) {
    if (t.phase != Phase::InputSelection) continue;
    all = all || t.note == "all paths";
    if (t.note == "all CC off") {
      no_cc = true;
      for (const auto& b : t.architecture.blocks) EXPECT_FALSE(b.path(PathKind::CC).has_value());
    }
  }
  EXPECT_TRUE(all);
  EXPECT_TRUE(no_cc);
}

TEST(Nas, CompletedTrialsAreValidAndPruned) {
  const auto ev = surrogate(structural_loss);
  const SearchState s = run_search(both_task(), small_config(4), ev);
  for (const auto& t : s.trials) {
    if (t.status != TrialStatus::Complete) continue;
    EXPECT_NO_THROW(validate(t.architecture)) << t.trial_id;
    EXPECT_EQ(prune_dependencies(t.architecture), t.architecture) << t.trial_id;
  }
  EXPECT_EQ(prune_dependencies(s.best_architecture), s.best_architecture);
}

TEST(Nas, UnreachableMasksFailWithoutTraining) {
  std::size_t calls = 0;
  const FunctionEvaluator ev([&calls](const NetworkSpec& s, const Hyperparams& hp,
                                      const EpochCallback&) {
    ++calls;
    const double loss = structural_loss(s, hp);
    return EvalResult{loss, {loss}, false};
  });
  SearchConfig c = small_config(13);
  c.trials_per_phase = 8;
  const SearchState s = run_search(both_task(), c, ev);
  std::size_t failed = 0;
  for (const auto& t : s.trials) {
    if (t.status == TrialStatus::Failed) {
      ++failed;
      EXPECT_FALSE(t.note.empty());
    }
  }
  EXPECT_EQ(calls + failed, s.trials.size());
}

TEST(Nas, DependencyCheckRemovesPlantedRedundantPath) {
  // Every live path lowers the loss except block 0's CR path.
  const auto ev = surrogate([](const NetworkSpec& s, const Hyperparams&) {
    double loss = 2.0;
    for (std::size_t b = 0; b < s.blocks.size(); ++b) {
      for (auto k : kAllPaths) {
        if (s.blocks[b].path(k) && !(b == 0 && k == PathKind::CR)) loss -= 0.1;
      }
    }
    return loss;
  });
  SearchConfig c = small_config();
  c.space.min_blocks = c.space.max_blocks = 2;
  c.trials_per_phase = 6;
  const SearchState s = run_search(both_task(), c, ev);
  const auto& b0 = s.best_architecture.blocks[0];
  EXPECT_FALSE(b0.path(PathKind::CR).has_value());
  EXPECT_TRUE(b0.path(PathKind::RR).has_value());
  EXPECT_TRUE(b0.path(PathKind::RC).has_value());
  EXPECT_TRUE(b0.path(PathKind::CC).has_value());
  EXPECT_TRUE(s.best_architecture.blocks[1].path(PathKind::RR).has_value());
  EXPECT_TRUE(s.best_architecture.blocks[1].path(PathKind::CR).has_value());
}

TEST(Nas, ConvexSurrogateImprovesWithMoreTrials) {
  // Loss depends only on the learning rate, minimised at 10^-2.5.
  const auto ev = surrogate([](const NetworkSpec&, const Hyperparams& hp) {
    const double x = std::log10(hp.learning_rate) + 2.5;
    return x * x;
  });
  auto best_lr_trial = [&](std::size_t trials, std::uint64_t seed) {
    SearchConfig c = small_config(seed);
    c.space.min_blocks = c.space.max_blocks = 1;
    c.selection_cap = 1;
    c.trials_per_phase = trials;
    const SearchState s = run_search(both_task(), c, ev);
    double best = INFINITY;
    for (const auto& t : s.trials) {
      if (t.phase == Phase::HyperparameterChoice && t.status == TrialStatus::Complete) {
        best = std::min(best, t.validation_loss);
      }
    }
    return best;
  };
  double sum5 = 0, sum20 = 0;
  std::size_t wins = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const double b5 = best_lr_trial(5, 1000 + rep);
    const double b20 = best_lr_trial(20, 2000 + rep);
    sum5 += b5;
    sum20 += b20;
    wins += b20 <= b5 ? 1 : 0;
  }
  EXPECT_LT(sum20, sum5);
  EXPECT_GE(wins, 30u);
}

TEST(Nas, HyperparameterPhaseCanOnlyImproveIncumbent) {
  const auto ev = surrogate(structural_loss);
  const SearchState s = run_search(both_task(), small_config(21), ev);
  double best_before = INFINITY;
  for (const auto& t : s.trials) {
    if (t.phase != Phase::HyperparameterChoice && t.status == TrialStatus::Complete &&
        t.phase != Phase::Customisation) {
      best_before = std::min(best_before, t.validation_loss);
    }
  }
  EXPECT_LE(s.best_validation_loss, best_before + 1e-12);
}

TEST(Nas, RandomSamplerReplaysProposals) {
  auto draw = [](std::uint64_t seed) {
    RandomSampler s(seed);
    std::vector<double> out;
    for (std::size_t i = 0; i < 4; ++i) {
      s.begin_trial({}, Phase::StructureRefinement, i);
      out.push_back(static_cast<double>(s.categorical("c", 7)));
      out.push_back(s.uniform("u", -1, 1));
      out.push_back(s.log_uniform("l", 1e-4, 1e-2));
    }
    return out;
  };
  EXPECT_EQ(draw(3), draw(3));
  EXPECT_NE(draw(3), draw(4));
  RandomSampler s(3);
  s.begin_trial({}, Phase::BlockNumber, 2);
  const auto first = s.categorical("x", 1000);
  s.begin_trial({}, Phase::BlockNumber, 2);
  EXPECT_EQ(s.categorical("x", 1000), first);
  for (int i = 0; i < 200; ++i) {
    const double v = s.log_uniform("l", 1e-4, 1e-2);
    EXPECT_GE(v, 1e-4 * (1 - 1e-12));
    EXPECT_LE(v, 1e-2 * (1 + 1e-12));
  }
  EXPECT_THROW(s.categorical("x", 0), ArgumentError);
  EXPECT_THROW(s.log_uniform("l", 0.0, 1.0), ArgumentError);
}

TEST(Nas, MedianPrunerNeedsReferenceTrials) {
  const MedianPruner p(1, 1);
  EXPECT_FALSE(p.should_prune(2, 1e9, {}));
  std::vector<Trial> ref(3);
  ref[0].curve = {5, 3, 1};
  ref[1].curve = {5, 4, 2};
  ref[2].curve = {5, 5, 3};
  EXPECT_FALSE(p.should_prune(0, 1e9, ref));  // warm-up epoch
  EXPECT_TRUE(p.should_prune(2, 2.5, ref));
  EXPECT_FALSE(p.should_prune(2, 2.0, ref));
  EXPECT_FALSE(p.should_prune(5, 1e9, ref));  // no reference reaches epoch 5
  ref[0].status = ref[1].status = ref[2].status = TrialStatus::Pruned;
  EXPECT_FALSE(p.should_prune(2, 1e9, ref));
  const MedianPruner strict(0, 4);
  ref[0].status = ref[1].status = ref[2].status = TrialStatus::Complete;
  EXPECT_FALSE(strict.should_prune(1, 1e9, ref));
}

TEST(Nas, PrunedTrialsCarryNote) {
  // Late phases report worse curves so the median rule fires.
  const auto ev = surrogate(
      [](const NetworkSpec& s, const Hyperparams& hp) { return structural_loss(s, hp); }, true);
  SearchConfig c = small_config();
  const SearchState s = run_search(both_task(), c, ev);
  for (const auto& t : s.trials) {
    if (t.status == TrialStatus::Pruned) {
      EXPECT_TRUE(t.note == "median" || t.note == "constraint") << t.note;
      EXPECT_TRUE(std::isnan(t.validation_loss));
    }
  }
  c.use_pruner = false;
  const SearchState off = run_search(both_task(), c, ev);
  for (const auto& t : off.trials) EXPECT_NE(t.note, "median");
  c.use_pruner = true;
  c.pruner_min_trials = 1000;
  const SearchState patient = run_search(both_task(), c, ev);
  for (const auto& t : patient.trials) EXPECT_NE(t.note, "median");
}

TEST(Nas, TrialStoreRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "hnn_test_trials.ndjson";
  std::filesystem::remove(path);
  const auto ev = surrogate(structural_loss, true);
  SearchConfig c = small_config();
  c.trial_store = path;
  const SearchState s = run_search(both_task(), c, ev);
  const auto loaded = TrialStore::load(path);
  ASSERT_EQ(loaded.size(), s.trials.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(trial_to_json(loaded[i]), trial_to_json(s.trials[i]));
  }
  std::filesystem::remove(path);
  EXPECT_THROW(TrialStore::load(path), DataError);
}

TEST(Nas, ConfigJsonRoundTripAndValidation) {
  SearchConfig c = small_config(77);
  c.constraints.min_params = 10;
  c.constraints.max_params = 5000;
  c.space.r2c_kinds = {ConversionKind::Polar};
  c.space.optimizers = {OptimizerKind::Sgd};
  c.pruner_min_trials = 3;
  const SearchConfig back = search_config_from_json(search_config_to_json(c));
  EXPECT_EQ(search_config_to_json(back), search_config_to_json(c));
  EXPECT_EQ(back.pruner_min_trials, 3u);
  EXPECT_THROW(search_config_from_json({{"trials_per_phase", 0}}), ConfigError);
  EXPECT_THROW(search_config_from_json({{"space", {{"min_blocks", 5}, {"max_blocks", 2}}}}),
               ConfigError);
  EXPECT_THROW(search_config_from_json({{"min_params", 10}, {"max_params", 5}}), ConfigError);
  EXPECT_THROW(search_config_from_json({{"space", {{"real_activations", {"cTanh"}}}}}),
               ConfigError);
  EXPECT_THROW(search_config_from_json({{"space", {{"channels", "many"}}}}), ConfigError);
}

TEST(Nas, StateJsonSummarisesRun) {
  const auto ev = surrogate(structural_loss);
  const SearchState s = run_search(both_task(), small_config(), ev);
  const auto j = search_state_to_json(s);
  EXPECT_EQ(j.at("phase"), "Done");
  EXPECT_EQ(j.at("trials").get<std::size_t>(), s.trials.size());
  EXPECT_EQ(network_spec_from_json(j.at("best_architecture")), s.best_architecture);
}

TEST(Nas, InitialArchitectureClampsAndAdapts) {
  TaskSpec task;
  task.input = IoDomain::Complex;
  task.output = IoDomain::Real;
  task.complex_channels = 2;
  const NetworkSpec s = initial_architecture(task, small_config(), 3);
  EXPECT_EQ(s.blocks.size(), 3u);
  EXPECT_TRUE(s.adapter.has_value());
  EXPECT_FALSE(s.heads.complex);
  EXPECT_NO_THROW(validate(s));
}

}  // namespace
}  // namespace hnn
