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

#include "hybridnn/nas.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "hybridnn/seed.hpp"

namespace hnn {
namespace {

constexpr std::array<Phase, 8> kPhases = {
    Phase::Customisation,       Phase::BlockNumber,        Phase::InputSelection,
    Phase::DependencyCheck,     Phase::StructureRefinement, Phase::ActivationDCChoice,
    Phase::HyperparameterChoice, Phase::Done};

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

template <typename T>
const T& pick(Sampler& s, const std::string& name, const std::vector<T>& options) {
  return options.at(s.categorical(name, options.size()));
}

std::size_t round_up(std::size_t v, std::size_t multiple) {
  return (v + multiple - 1) / multiple * multiple;
}

// Keeps cross-path channel counts compatible with their conversion arity.
void fix_arity(NetworkSpec& spec) {
  for (auto& block : spec.blocks) {
    for (auto k : kAllPaths) {
      auto& p = block.path(k);
      if (!p) continue;
      if (p->conversion) p->channels = round_up(p->channels, p->conversion->in_arity());
      if (p->channels % p->groups != 0) p->groups = 1;
    }
  }
}

struct Candidate {
  NetworkSpec spec;
  Hyperparams hp;
  std::string note;
  std::optional<std::string> error;  // set when the proposal is already invalid
};

struct Incumbent {
  NetworkSpec spec;
  Hyperparams hp;
  double loss = std::numeric_limits<double>::infinity();
  std::size_t params = 0;
  bool feasible = false;
};

class Engine {
 public:
  Engine(const TaskSpec& task, const SearchConfig& cfg, const Evaluator& ev, Sampler& sampler)
      : task_(task),
        cfg_(cfg),
        ev_(ev),
        sampler_(sampler),
        pruner_(cfg.pruner_warmup_epochs, cfg.pruner_min_trials) {
    if (cfg.trial_store) store_.emplace(*cfg.trial_store);
    st_.seed = cfg.seed;
    st_.constraints = cfg.constraints;
  }

  SearchState run() {
    customisation();
    block_number();
    selection_loop();
    structure_refinement();
    activation_choice();
    hyperparameter_choice();
    enter(Phase::Done);
    if (!inc_.feasible) {
      throw InfeasibleSearchError(
          "no architecture satisfies " + std::to_string(cfg_.constraints.min_params) +
              " <= parameters <= " + std::to_string(cfg_.constraints.max_params),
          best_infeasible_);
    }
    st_.best_architecture = inc_.spec;
    st_.best_hyperparams = inc_.hp;
    st_.best_validation_loss = inc_.loss;
    st_.best_param_count = inc_.params;
    return st_;
  }

 private:
  void enter(Phase p) {
    st_.phase = p;
    st_.phase_history.push_back(p);
  }

  Hyperparams trial_hp(Phase phase, std::size_t index) const {
    Hyperparams hp = inc_.hp;
    hp.seed = derive_seed(cfg_.seed, {static_cast<std::uint64_t>(phase), index});
    return hp;
  }

  void begin(Phase phase, std::size_t index) { sampler_.begin_trial(st_.trials, phase, index); }

  // Evaluates candidates of one phase and returns their trials in id order.
  std::vector<Trial> run_trials(Phase phase, std::vector<Candidate> cands, bool constrained) {
    std::vector<Trial> trials(cands.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      Trial& t = trials[i];
      t.trial_id = next_id_++;
      t.phase = phase;
      t.architecture = cands[i].spec;
      t.hyperparams = cands[i].hp;
      t.note = cands[i].note;
      if (cands[i].error) {
        t.status = TrialStatus::Failed;
        t.note = *cands[i].error;
        continue;
      }
      try {
        t.param_count = count_parameters(cands[i].spec).total;
      } catch (const Error& e) {
        t.status = TrialStatus::Failed;
        t.note = e.what();
        continue;
      }
      if (constrained && !cfg_.constraints.satisfied(t.param_count)) {
        t.status = TrialStatus::Pruned;
        t.note = "constraint";
        const std::size_t v = cfg_.constraints.violation(t.param_count);
        if (!best_infeasible_ || v < cfg_.constraints.violation(best_infeasible_->param_count)) {
          best_infeasible_ = t;
        }
        continue;
      }
      todo.push_back(i);
    }

    auto work = [&](std::size_t i) {
      Trial& t = trials[i];
      const auto start = std::chrono::steady_clock::now();
      try {
        EpochCallback cb;
        if (cfg_.use_pruner) {
          cb = [this](std::size_t epoch, double v) {
            return !pruner_.should_prune(epoch, v, reference_);
          };
        }
        EvalResult r = ev_.evaluate(t.architecture, t.hyperparams, cb);
        t.curve = r.curve;
        if (r.stopped_early) {
          t.status = TrialStatus::Pruned;
          t.note = "median";
        } else if (!std::isfinite(r.validation_loss)) {
          t.status = TrialStatus::Failed;
          t.note = "non-finite validation loss";
        } else {
          t.status = TrialStatus::Complete;
          t.validation_loss = r.validation_loss;
        }
      } catch (const Error& e) {
        t.status = TrialStatus::Failed;
        t.note = e.what();
      }
      t.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    const std::size_t threads = std::min(std::max<std::size_t>(1, cfg_.threads), todo.size());
    if (threads <= 1) {
      for (auto i : todo) work(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
          for (std::size_t j = next++; j < todo.size(); j = next++) work(todo[j]);
        });
      }
      for (auto& th : pool) th.join();
    }

    for (auto& t : trials) {
      if (!std::isfinite(t.validation_loss)) t.validation_loss = std::numeric_limits<double>::quiet_NaN();
      st_.trials.push_back(t);
      if (store_) store_->append(t);
    }
    // The pruner only compares against earlier phases so that parallel
    // execution cannot change decisions.
    for (const auto& t : trials) {
      if (t.status == TrialStatus::Complete) reference_.push_back(t);
    }
    return trials;
  }

  static const Trial* best_complete(const std::vector<Trial>& trials) {
    const Trial* best = nullptr;
    for (const auto& t : trials) {
      if (t.status != TrialStatus::Complete) continue;
      if (!best || t.validation_loss < best->validation_loss) best = &t;
    }
    return best;
  }

  void adopt(const Trial& t) {
    inc_.spec = t.architecture;
    inc_.hp = t.hyperparams;
    inc_.hp.seed = 0;
    inc_.loss = t.validation_loss;
    inc_.params = t.param_count;
    inc_.feasible = cfg_.constraints.satisfied(t.param_count);
  }

  // Constrained acceptance: the candidate must be feasible and beat an
  // incumbent that is itself feasible.
  bool offer(const std::vector<Trial>& trials, bool allow_equal = false) {
    const Trial* best = best_complete(trials);
    if (!best || !cfg_.constraints.satisfied(best->param_count)) return false;
    const bool better = !inc_.feasible || best->validation_loss < inc_.loss ||
                        (allow_equal && best->validation_loss <= inc_.loss);
    if (!better) return false;
    adopt(*best);
    return true;
  }

  void customisation() {
    enter(Phase::Customisation);
    inc_.hp = Hyperparams{cfg_.preliminary_lr, cfg_.epochs, cfg_.batch_size, cfg_.optimizer, 0};
    const std::size_t blocks =
        std::clamp(cfg_.prototype.blocks, cfg_.space.min_blocks, cfg_.space.max_blocks);
    inc_.spec = initial_architecture(task_, cfg_, blocks);
    const auto trials = run_trials(Phase::Customisation,
                                   {Candidate{inc_.spec, trial_hp(Phase::Customisation, 0),
                                              "prototype", std::nullopt}},
                                   false);
    if (const Trial* t = best_complete(trials)) adopt(*t);
    inc_.params = count_parameters(inc_.spec).total;
    inc_.feasible = cfg_.constraints.satisfied(inc_.params) && std::isfinite(inc_.loss);
  }

  void block_number() {
    enter(Phase::BlockNumber);
    const std::size_t lo = cfg_.space.min_blocks, hi = cfg_.space.max_blocks;
    if (lo == hi) {
      if (inc_.spec.blocks.size() != lo) {
        inc_.spec = initial_architecture(task_, cfg_, lo);
        inc_.loss = std::numeric_limits<double>::infinity();
      }
      inc_.params = count_parameters(inc_.spec).total;
      inc_.feasible = cfg_.constraints.satisfied(inc_.params) && std::isfinite(inc_.loss);
      return;
    }
    const std::size_t range = hi - lo + 1;
    const std::size_t n = std::min(range, std::max<std::size_t>(1, cfg_.trials_per_phase));
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v = n == 1 ? hi : lo + (i * (range - 1) + (n - 1) / 2) / (n - 1);
      if (counts.empty() || counts.back() != v) counts.push_back(v);
    }
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      cands.push_back({initial_architecture(task_, cfg_, counts[i]),
                       trial_hp(Phase::BlockNumber, i), "blocks=" + std::to_string(counts[i]),
                       std::nullopt});
    }
    const auto trials = run_trials(Phase::BlockNumber, cands, false);
    if (const Trial* best = best_complete(trials)) adopt(*best);
    inc_.feasible = cfg_.constraints.satisfied(inc_.params) && std::isfinite(inc_.loss);
  }

  static std::vector<std::pair<std::size_t, PathKind>> live_paths(const NetworkSpec& spec) {
    std::vector<std::pair<std::size_t, PathKind>> out;
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
      for (auto k : kAllPaths) {
        if (spec.blocks[b].path(k)) out.emplace_back(b, k);
      }
    }
    return out;
  }

  static Candidate pruned_candidate(NetworkSpec spec, Hyperparams hp, std::string note) {
    Candidate c{spec, hp, std::move(note), std::nullopt};
    try {
      c.spec = prune_dependencies(std::move(spec));
    } catch (const ConfigError& e) {
      c.error = e.what();
    }
    return c;
  }

  static void dedupe(std::vector<Candidate>& cands) {
    std::vector<Candidate> out;
    for (auto& c : cands) {
      const bool seen = std::any_of(out.begin(), out.end(), [&](const Candidate& o) {
        return !o.error && !c.error && o.spec == c.spec;
      });
      if (!seen) out.push_back(std::move(c));
    }
    cands = std::move(out);
  }

  void selection_loop() {
    std::size_t iteration = 0;
    while (iteration < cfg_.selection_cap) {
      const NetworkSpec before = inc_.spec;
      const bool first = iteration == 0;

      enter(Phase::InputSelection);
      std::vector<Candidate> cands;
      std::size_t index = st_.trials.size();
      if (first) {
        cands.push_back(pruned_candidate(inc_.spec, trial_hp(Phase::InputSelection, index++),
                                         "all paths"));
        NetworkSpec no_cc = inc_.spec;
        for (auto& block : no_cc.blocks) block.path(PathKind::CC).reset();
        cands.push_back(pruned_candidate(no_cc, trial_hp(Phase::InputSelection, index++),
                                         "all CC off"));
      }
      const auto live = live_paths(inc_.spec);
      while (cands.size() < cfg_.trials_per_phase) {
        begin(Phase::InputSelection, index);
        NetworkSpec masked = inc_.spec;
        std::string mask;
        for (const auto& [b, k] : live) {
          const bool keep = sampler_.categorical("keep_b" + std::to_string(b) + to_string(k), 2) == 1;
          mask += keep ? '1' : '0';
          if (!keep) masked.blocks[b].path(k).reset();
        }
        cands.push_back(pruned_candidate(masked, trial_hp(Phase::InputSelection, index++),
                                         "mask=" + mask));
      }
      dedupe(cands);
      offer(run_trials(Phase::InputSelection, std::move(cands), true));

      // Single-path removals that do not hurt validation loss are redundant.
      enter(Phase::DependencyCheck);
      std::vector<Candidate> removals;
      auto paths = live_paths(inc_.spec);
      if (paths.size() > 1) {
        begin(Phase::DependencyCheck, st_.trials.size());
        while (paths.size() > cfg_.trials_per_phase) {
          paths.erase(paths.begin() +
                      static_cast<std::ptrdiff_t>(sampler_.categorical("drop", paths.size())));
        }
        index = st_.trials.size();
        for (const auto& [b, k] : paths) {
          NetworkSpec s = inc_.spec;
          s.blocks[b].path(k).reset();
          removals.push_back(pruned_candidate(s, trial_hp(Phase::DependencyCheck, index++),
                                              "remove b" + std::to_string(b) + " " + to_string(k)));
        }
        dedupe(removals);
        offer(run_trials(Phase::DependencyCheck, std::move(removals), true), true);
      }
      ++iteration;
      if (inc_.spec == before) break;
    }
    st_.selection_iterations = iteration;
  }

  void structure_refinement() {
    enter(Phase::StructureRefinement);
    const auto& sp = cfg_.space;
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < cfg_.trials_per_phase; ++i) {
      const std::size_t index = st_.trials.size() + i;
      begin(Phase::StructureRefinement, index);
      NetworkSpec s = inc_.spec;
      for (std::size_t b = 0; b < s.blocks.size(); ++b) {
        auto& block = s.blocks[b];
        const std::string tag = "b" + std::to_string(b);
        block.pool = pick(sampler_, tag + "_pool", sp.pools);
        const auto& kernels = b == 0 && !sp.first_kernels.empty() ? sp.first_kernels : sp.kernels;
        for (auto k : kAllPaths) {
          auto& p = block.path(k);
          if (!p) continue;
          const std::string pt = tag + to_string(k);
          p->channels = pick(sampler_, pt + "_c", sp.channels);
          p->kernel = pick(sampler_, pt + "_k", kernels);
          p->groups = 1;
          p->norm = sampler_.categorical(pt + "_norm", 2) == 1;
          p->dropout = pick(sampler_, pt + "_p", sp.dropouts);
        }
      }
      fix_arity(s);
      cands.push_back({s, trial_hp(Phase::StructureRefinement, index), "structure", std::nullopt});
    }
    dedupe(cands);
    offer(run_trials(Phase::StructureRefinement, std::move(cands), true));
  }

  void activation_choice() {
    enter(Phase::ActivationDCChoice);
    const auto& sp = cfg_.space;
    std::vector<std::string> real_or_none = sp.real_activations;
    real_or_none.push_back("none");
    std::vector<std::string> complex_or_none = sp.complex_activations;
    complex_or_none.push_back("none");
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < cfg_.trials_per_phase; ++i) {
      const std::size_t index = st_.trials.size() + i;
      begin(Phase::ActivationDCChoice, index);
      NetworkSpec s = inc_.spec;
      for (std::size_t b = 0; b < s.blocks.size(); ++b) {
        for (auto k : kAllPaths) {
          auto& p = s.blocks[b].path(k);
          if (!p) continue;
          const std::string pt = "b" + std::to_string(b) + to_string(k);
          switch (k) {
            case PathKind::RR: p->activation = pick(sampler_, pt + "_act", sp.real_activations); break;
            case PathKind::CC: p->activation = pick(sampler_, pt + "_act", sp.complex_activations); break;
            case PathKind::RC:
              p->activation = pick(sampler_, pt + "_act", real_or_none);
              p->conversion = r2c_spec(pick(sampler_, pt + "_dc", sp.r2c_kinds));
              break;
            case PathKind::CR:
              p->activation = pick(sampler_, pt + "_act", complex_or_none);
              p->conversion = c2r_spec(pick(sampler_, pt + "_dc", sp.c2r_kinds), 3);
              break;
          }
        }
      }
      fix_arity(s);
      cands.push_back({s, trial_hp(Phase::ActivationDCChoice, index), "activations", std::nullopt});
    }
    dedupe(cands);
    offer(run_trials(Phase::ActivationDCChoice, std::move(cands), true));
  }

  void hyperparameter_choice() {
    enter(Phase::HyperparameterChoice);
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < cfg_.trials_per_phase; ++i) {
      const std::size_t index = st_.trials.size() + i;
      begin(Phase::HyperparameterChoice, index);
      Hyperparams hp = trial_hp(Phase::HyperparameterChoice, index);
      hp.learning_rate = sampler_.log_uniform("lr", cfg_.space.lr_min, cfg_.space.lr_max);
      hp.optimizer = pick(sampler_, "optimizer", cfg_.space.optimizers);
      cands.push_back({inc_.spec, hp, "hyperparameters", std::nullopt});
    }
    offer(run_trials(Phase::HyperparameterChoice, std::move(cands), true));
  }

  const TaskSpec& task_;
  const SearchConfig& cfg_;
  const Evaluator& ev_;
  Sampler& sampler_;
  std::optional<TrialStore> store_;
  MedianPruner pruner_;
  SearchState st_;
  std::vector<Trial> reference_;
  Incumbent inc_;
  std::optional<Trial> best_infeasible_;
  std::size_t next_id_ = 0;
};

void validate_config(const SearchConfig& c) {
  const auto& s = c.space;
  if (c.trials_per_phase == 0) throw ConfigError("trials_per_phase must be positive");
  if (s.min_blocks == 0 || s.min_blocks > s.max_blocks) {
    throw ConfigError("block range must satisfy 1 <= min_blocks <= max_blocks");
  }
  if (c.constraints.min_params > c.constraints.max_params) {
    throw ConfigError("min_params exceeds max_params");
  }
  if (s.channels.empty() || s.kernels.empty() || s.pools.empty() || s.dropouts.empty() ||
      s.real_activations.empty() || s.complex_activations.empty() || s.r2c_kinds.empty() ||
      s.c2r_kinds.empty() || s.optimizers.empty()) {
    throw ConfigError("search space lists must not be empty");
  }
  if (!(s.lr_min > 0.0 && s.lr_min <= s.lr_max)) throw ConfigError("invalid learning-rate range");
  if (!(c.preliminary_lr > 0.0)) throw ConfigError("preliminary learning rate must be positive");
  if (c.epochs == 0 || c.batch_size == 0) throw ConfigError("epochs and batch size must be positive");
  for (const auto& a : s.real_activations) {
    if (activation_by_name(a).family != ActivationFamily::RealNamed) {
      throw ConfigError("'" + a + "' is not a real activation");
    }
  }
  for (const auto& a : s.complex_activations) {
    const auto f = activation_by_name(a).family;
    if (f == ActivationFamily::RealNamed || f == ActivationFamily::None) {
      throw ConfigError("'" + a + "' is not a complex activation");
    }
  }
  for (auto k : s.r2c_kinds) r2c_spec(k);
  for (auto k : s.c2r_kinds) c2r_spec(k);
}

nlohmann::json prototype_to_json(const PrototypeOptions& p) {
  return {{"blocks", p.blocks},
          {"channels", p.channels},
          {"kernel", p.kernel},
          {"first_kernel", p.first_kernel},
          {"real_activation", p.real_activation},
          {"complex_activation", p.complex_activation},
          {"r2c", to_string(p.r2c.kind)},
          {"c2r", to_string(p.c2r.kind)}};
}

PrototypeOptions prototype_from_json(const nlohmann::json& j, PrototypeOptions p) {
  p.blocks = j.value("blocks", p.blocks);
  p.channels = j.value("channels", p.channels);
  p.kernel = j.value("kernel", p.kernel);
  p.first_kernel = j.value("first_kernel", p.first_kernel);
  p.real_activation = j.value("real_activation", p.real_activation);
  p.complex_activation = j.value("complex_activation", p.complex_activation);
  if (j.contains("r2c")) p.r2c = r2c_spec(conversion_kind_from_string(j.at("r2c")));
  if (j.contains("c2r")) p.c2r = c2r_spec(conversion_kind_from_string(j.at("c2r")));
  return p;
}

template <typename T>
std::vector<std::string> names_of(const std::vector<T>& v) {
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(to_string(x));
  return out;
}

}  // namespace

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::Customisation: return "Customisation";
    case Phase::BlockNumber: return "BlockNumber";
    case Phase::InputSelection: return "InputSelection";
    case Phase::DependencyCheck: return "DependencyCheck";
    case Phase::StructureRefinement: return "StructureRefinement";
    case Phase::ActivationDCChoice: return "ActivationDCChoice";
    case Phase::HyperparameterChoice: return "HyperparameterChoice";
    case Phase::Done: return "Done";
  }
  return "?";
}

Phase phase_from_string(const std::string& name) {
  for (auto p : kPhases) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown phase '" + name + "'");
}

std::string to_string(TrialStatus status) {
  switch (status) {
    case TrialStatus::Complete: return "complete";
    case TrialStatus::Pruned: return "pruned";
    case TrialStatus::Failed: return "failed";
  }
  return "?";
}

TrialStatus trial_status_from_string(const std::string& name) {
  if (name == "complete") return TrialStatus::Complete;
  if (name == "pruned") return TrialStatus::Pruned;
  if (name == "failed") return TrialStatus::Failed;
  throw ConfigError("unknown trial status '" + name + "'");
}

std::size_t Constraints::violation(std::size_t count) const {
  if (count < min_params) return min_params - count;
  if (count > max_params) return count - max_params;
  return 0;
}

nlohmann::json trial_to_json(const Trial& t, bool include_wall_time) {
  nlohmann::json curve = nlohmann::json::array();
  for (double v : t.curve) curve.push_back(number_or_null(v));
  nlohmann::json j = {{"trial_id", t.trial_id},
                      {"phase", to_string(t.phase)},
                      {"architecture", network_spec_to_json(t.architecture)},
                      {"hyperparams", hyperparams_to_json(t.hyperparams)},
                      {"validation_loss", number_or_null(t.validation_loss)},
                      {"param_count", t.param_count},
                      {"status", to_string(t.status)},
                      {"note", t.note},
                      {"curve", curve}};
  if (include_wall_time) j["wall_time"] = t.wall_time;
  return j;
}

Trial trial_from_json(const nlohmann::json& j) {
  Trial t;
  t.trial_id = j.at("trial_id").get<std::size_t>();
  t.phase = phase_from_string(j.at("phase").get<std::string>());
  t.architecture = network_spec_from_json(j.at("architecture"));
  t.hyperparams = hyperparams_from_json(j.at("hyperparams"));
  const auto& v = j.at("validation_loss");
  t.validation_loss = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  t.param_count = j.at("param_count").get<std::size_t>();
  t.status = trial_status_from_string(j.at("status").get<std::string>());
  t.note = j.value("note", std::string{});
  t.wall_time = j.value("wall_time", 0.0);
  for (const auto& c : j.value("curve", nlohmann::json::array())) {
    t.curve.push_back(c.is_null() ? std::numeric_limits<double>::quiet_NaN() : c.get<double>());
  }
  return t;
}

nlohmann::json search_config_to_json(const SearchConfig& c) {
  const auto& s = c.space;
  nlohmann::json j;
  j["trials_per_phase"] = c.trials_per_phase;
  j["min_params"] = c.constraints.min_params;
  j["max_params"] = c.constraints.max_params;
  j["seed"] = c.seed;
  j["preliminary_lr"] = c.preliminary_lr;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["optimizer"] = to_string(c.optimizer);
  j["selection_cap"] = c.selection_cap;
  j["use_pruner"] = c.use_pruner;
  j["pruner_warmup_epochs"] = c.pruner_warmup_epochs;
  j["pruner_min_trials"] = c.pruner_min_trials;
  j["threads"] = c.threads;
  j["space"] = {{"min_blocks", s.min_blocks},
                {"max_blocks", s.max_blocks},
                {"channels", s.channels},
                {"kernels", s.kernels},
                {"first_kernels", s.first_kernels},
                {"pools", s.pools},
                {"dropouts", s.dropouts},
                {"real_activations", s.real_activations},
                {"complex_activations", s.complex_activations},
                {"r2c_kinds", names_of(s.r2c_kinds)},
                {"c2r_kinds", names_of(s.c2r_kinds)},
                {"lr_min", s.lr_min},
                {"lr_max", s.lr_max},
                {"optimizers", names_of(s.optimizers)}};
  j["prototype"] = prototype_to_json(c.prototype);
  j["adapt"] = {{"mode", to_string(c.adapt.mode)},
                {"c2r", to_string(c.adapt.c2r.kind)},
                {"r2c", to_string(c.adapt.r2c.kind)}};
  return j;
}

SearchConfig search_config_from_json(const nlohmann::json& j, SearchConfig c) {
  try {
    c.trials_per_phase = j.value("trials_per_phase", c.trials_per_phase);
    c.constraints.min_params = j.value("min_params", c.constraints.min_params);
    c.constraints.max_params = j.value("max_params", c.constraints.max_params);
    c.seed = j.value("seed", c.seed);
    c.preliminary_lr = j.value("preliminary_lr", c.preliminary_lr);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    if (j.contains("optimizer")) c.optimizer = optimizer_from_string(j.at("optimizer"));
    c.selection_cap = j.value("selection_cap", c.selection_cap);
    c.use_pruner = j.value("use_pruner", c.use_pruner);
    c.pruner_warmup_epochs = j.value("pruner_warmup_epochs", c.pruner_warmup_epochs);
    c.pruner_min_trials = j.value("pruner_min_trials", c.pruner_min_trials);
    c.threads = j.value("threads", c.threads);
    if (j.contains("trial_store")) c.trial_store = j.at("trial_store").get<std::string>();
    if (j.contains("space")) {
      const auto& s = j.at("space");
      auto& o = c.space;
      o.min_blocks = s.value("min_blocks", o.min_blocks);
      o.max_blocks = s.value("max_blocks", o.max_blocks);
      o.channels = s.value("channels", o.channels);
      o.kernels = s.value("kernels", o.kernels);
      o.first_kernels = s.value("first_kernels", o.first_kernels);
      o.pools = s.value("pools", o.pools);
      o.dropouts = s.value("dropouts", o.dropouts);
      o.real_activations = s.value("real_activations", o.real_activations);
      o.complex_activations = s.value("complex_activations", o.complex_activations);
      if (s.contains("r2c_kinds")) {
        o.r2c_kinds.clear();
        for (const auto& k : s.at("r2c_kinds")) o.r2c_kinds.push_back(conversion_kind_from_string(k));
      }
      if (s.contains("c2r_kinds")) {
        o.c2r_kinds.clear();
        for (const auto& k : s.at("c2r_kinds")) o.c2r_kinds.push_back(conversion_kind_from_string(k));
      }
      o.lr_min = s.value("lr_min", o.lr_min);
      o.lr_max = s.value("lr_max", o.lr_max);
      if (s.contains("optimizers")) {
        o.optimizers.clear();
        for (const auto& k : s.at("optimizers")) o.optimizers.push_back(optimizer_from_string(k));
      }
    }
    if (j.contains("prototype")) c.prototype = prototype_from_json(j.at("prototype"), c.prototype);
    if (j.contains("adapt")) {
      const auto& a = j.at("adapt");
      if (a.contains("mode")) c.adapt.mode = adapt_mode_from_string(a.at("mode"));
      if (a.contains("c2r")) c.adapt.c2r = c2r_spec(conversion_kind_from_string(a.at("c2r")));
      if (a.contains("r2c")) c.adapt.r2c = r2c_spec(conversion_kind_from_string(a.at("r2c")));
    }
    validate_config(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed search config: ") + e.what());
  }
}

nlohmann::json search_state_to_json(const SearchState& s) {
  nlohmann::json history = nlohmann::json::array();
  for (auto p : s.phase_history) history.push_back(to_string(p));
  return {{"phase", to_string(s.phase)},
          {"best_architecture", network_spec_to_json(s.best_architecture)},
          {"best_hyperparams", hyperparams_to_json(s.best_hyperparams)},
          {"best_validation_loss", number_or_null(s.best_validation_loss)},
          {"best_param_count", s.best_param_count},
          {"seed", s.seed},
          {"constraints", {{"min_params", s.constraints.min_params},
                           {"max_params", s.constraints.max_params}}},
          {"phase_history", history},
          {"selection_iterations", s.selection_iterations},
          {"trials", s.trials.size()}};
}

TrainingEvaluator::TrainingEvaluator(TaskData data) : data_(std::move(data)) {
  if (!data_.source) throw ArgumentError("evaluator needs an example source");
  if (data_.val.empty()) throw DataError("search needs a validation split");
}

EvalResult TrainingEvaluator::evaluate(const NetworkSpec& spec, const Hyperparams& hp,
                                       const EpochCallback& on_epoch) const {
  Network net(spec, hp.seed);
  TaskData d = data_;
  d.test.clear();
  const TrainReport r = train(net, d, hp, on_epoch);
  return {r.val_loss.back(), r.val_loss, r.stopped_early};
}

NetworkSpec initial_architecture(const TaskSpec& task, const SearchConfig& config,
                                 std::size_t blocks) {
  PrototypeOptions p = config.prototype;
  p.blocks = blocks;
  NetworkSpec spec = make_prototype(task.input, task.real_channels, task.complex_channels,
                                    task.classes, p);
  return adapt_io(std::move(spec), task.input, task.output, config.adapt);
}

SearchState run_search(const TaskSpec& task, const SearchConfig& config, const Evaluator& evaluator,
                       Sampler* sampler) {
  validate_config(config);
  RandomSampler fallback(config.seed);
  Engine engine(task, config, evaluator, sampler ? *sampler : fallback);
  return engine.run();
}

}  // namespace hnn
