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

#include "hybridnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hybridnn/errors.hpp"
#include "hybridnn/ops.hpp"
#include "hybridnn/seed.hpp"

namespace hnn {
namespace {

template <typename T>
Tensor stack_examples(const std::vector<const Tensor*>& parts) {
  const Shape inner = parts.front()->shape();
  Shape shape{parts.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  std::vector<T> data;
  data.reserve(shape_numel(shape));
  for (const Tensor* t : parts) {
    if (t->shape() != inner) {
      throw DataError("examples in a batch differ in shape: " + shape_to_string(inner) + " vs " +
                      shape_to_string(t->shape()));
    }
    if constexpr (std::is_same_v<T, double>) {
      auto d = t->real_data();
      data.insert(data.end(), d.begin(), d.end());
    } else {
      auto d = t->complex_data();
      data.insert(data.end(), d.begin(), d.end());
    }
  }
  if constexpr (std::is_same_v<T, double>) {
    return Tensor::real(std::move(shape), std::move(data));
  } else {
    return Tensor::complex(std::move(shape), std::move(data));
  }
}

void check_hyperparams(const Hyperparams& hp) {
  if (!(hp.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (hp.batch_size == 0) throw ConfigError("batch size must be positive");
}

std::vector<int> labels_of(const std::vector<Example>& ex) {
  std::vector<int> out;
  out.reserve(ex.size());
  for (const auto& e : ex) out.push_back(e.label);
  return out;
}

}  // namespace

InMemorySource::InMemorySource(std::vector<Example> examples) : examples_(std::move(examples)) {}

int InMemorySource::label(std::size_t index) const { return examples_.at(index).label; }

Example InMemorySource::get(std::size_t index, std::uint64_t) const { return examples_.at(index); }

nlohmann::json hyperparams_to_json(const Hyperparams& h) {
  return {{"learning_rate", h.learning_rate},
          {"epochs", h.epochs},
          {"batch_size", h.batch_size},
          {"optimizer", to_string(h.optimizer)},
          {"seed", h.seed}};
}

Hyperparams hyperparams_from_json(const nlohmann::json& j, Hyperparams d) {
  try {
    d.learning_rate = j.value("learning_rate", d.learning_rate);
    d.epochs = j.value("epochs", d.epochs);
    d.batch_size = j.value("batch_size", d.batch_size);
    if (j.contains("optimizer")) d.optimizer = optimizer_from_string(j.at("optimizer"));
    d.seed = j.value("seed", d.seed);
    check_hyperparams(d);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed hyperparameters: ") + e.what());
  }
}

nlohmann::json train_report_to_json(const TrainReport& r) {
  return {{"train_loss", r.train_loss},       {"val_loss", r.val_loss},
          {"test_loss", r.test_loss},         {"test_accuracy", r.test_accuracy},
          {"parameters", r.parameters},       {"epochs_run", r.epochs_run},
          {"stopped_early", r.stopped_early}};
}

NetworkInput make_batch(const std::vector<Example>& examples) {
  if (examples.empty()) throw DataError("empty batch");
  NetworkInput in;
  std::vector<const Tensor*> reals, complexes;
  for (const auto& e : examples) {
    if (e.real.has_value() != examples.front().real.has_value() ||
        e.complex.has_value() != examples.front().complex.has_value()) {
      throw DataError("examples in a batch carry different domains");
    }
    if (e.real) reals.push_back(&*e.real);
    if (e.complex) complexes.push_back(&*e.complex);
  }
  if (!reals.empty()) in.real = Var(stack_examples<double>(reals));
  if (!complexes.empty()) in.complex = Var(stack_examples<cplx>(complexes));
  return in;
}

Evaluation evaluate(Network& net, const ExampleSource& source, std::span<const std::size_t> indices,
                    std::size_t batch_size, std::uint64_t access) {
  if (indices.empty()) throw DataError("cannot evaluate an empty split");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const std::size_t end = std::min(indices.size(), start + batch_size);
    std::vector<Example> ex;
    for (std::size_t i = start; i < end; ++i) ex.push_back(source.get(indices[i], access));
    const auto labels = labels_of(ex);
    Var logits = net.forward(make_batch(ex), false).detach();
    const double loss = cross_entropy(logits, labels).value().item_real();
    loss_sum += loss * static_cast<double>(ex.size());
    const auto d = logits.value().real_data();
    const std::size_t k = logits.shape()[1];
    for (std::size_t b = 0; b < ex.size(); ++b) {
      const auto row = d.subspan(b * k, k);
      const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      if (best == labels[b]) ++correct;
    }
  }
  const auto n = static_cast<double>(indices.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

TrainReport train(Network& net, const TaskData& data, const Hyperparams& hp,
                  const EpochCallback& on_epoch) {
  if (!data.source) throw ArgumentError("task has no example source");
  if (data.train.empty()) throw DataError("empty training split");
  check_hyperparams(hp);

  auto params = net.parameters();
  auto optimizer = make_optimizer(hp.optimizer, hp.learning_rate);
  Rng shuffle_rng(derive_seed(hp.seed, {1}));
  Rng dropout_rng(derive_seed(hp.seed, {2}));

  TrainReport report;
  report.parameters = net.count_parameters().total;
  report.train_loss.push_back(evaluate(net, *data.source, data.train, hp.batch_size).loss);
  if (!data.val.empty()) {
    report.val_loss.push_back(evaluate(net, *data.source, data.val, hp.batch_size).loss);
  }

  std::vector<std::size_t> order = data.train;
  for (std::size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t end = std::min(order.size(), start + hp.batch_size);
      std::vector<Example> ex;
      for (std::size_t i = start; i < end; ++i) ex.push_back(data.source->get(order[i], epoch));
      const auto labels = labels_of(ex);
      Var loss = cross_entropy(net.forward(make_batch(ex), true, &dropout_rng), labels);
      const double value = loss.value().item_real();
      if (!std::isfinite(value)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) +
                           ", batch starting at " + std::to_string(start));
      }
      loss_sum += value * static_cast<double>(ex.size());
      const auto grads = backward(loss, params);
      optimizer->step(params, grads);
    }
    report.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
    double monitored = report.train_loss.back();
    if (!data.val.empty()) {
      monitored = evaluate(net, *data.source, data.val, hp.batch_size).loss;
      report.val_loss.push_back(monitored);
    }
    if (!std::isfinite(monitored)) {
      throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    report.epochs_run = epoch;
    if (on_epoch && !on_epoch(epoch, monitored)) {
      report.stopped_early = true;
      break;
    }
  }
  if (!data.test.empty()) {
    const auto ev = evaluate(net, *data.source, data.test, hp.batch_size);
    report.test_loss = ev.loss;
    report.test_accuracy = ev.accuracy;
  }
  return report;
}

Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows) {
  if (t.dim() != 2) throw ShapeError("gather_rows expects a 2-D tensor");
  const std::size_t cols = t.shape()[1];
  if (t.is_complex()) {
    std::vector<cplx> out;
    out.reserve(rows.size() * cols);
    const auto d = t.complex_data();
    for (auto r : rows) out.insert(out.end(), d.begin() + r * cols, d.begin() + (r + 1) * cols);
    return Tensor::complex({rows.size(), cols}, std::move(out));
  }
  std::vector<double> out;
  out.reserve(rows.size() * cols);
  const auto d = t.real_data();
  for (auto r : rows) {
    if (r >= t.shape()[0]) throw ShapeError("row index out of range");
    out.insert(out.end(), d.begin() + static_cast<std::ptrdiff_t>(r * cols),
               d.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
  }
  return Tensor::real({rows.size(), cols}, std::move(out));
}

std::vector<double> train_regression(Mlp& mlp, const Tensor& inputs, const Tensor& targets,
                                     const Hyperparams& hp) {
  check_hyperparams(hp);
  if (inputs.dim() != 2 || targets.dim() != 2 || inputs.shape()[0] != targets.shape()[0]) {
    throw ShapeError("regression data must be [n, in] and [n, out] with matching n");
  }
  const std::size_t n = inputs.shape()[0];
  if (n == 0) throw DataError("empty regression dataset");
  auto params = mlp.parameters();
  auto optimizer = make_optimizer(hp.optimizer, hp.learning_rate);
  Rng rng(derive_seed(hp.seed, {1}));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto full_loss = [&] {
    double s = 0.0;
    for (std::size_t start = 0; start < n; start += 4096) {
      const std::size_t end = std::min(n, start + 4096);
      std::span<const std::size_t> rows(order.data() + start, end - start);
      const double l =
          mse(mlp.forward(Var(gather_rows(inputs, rows))), gather_rows(targets, rows)).value().item_real();
      s += l * static_cast<double>(end - start);
    }
    return s / static_cast<double>(n);
  };
  std::vector<double> losses{full_loss()};
  for (std::size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double s = 0.0;
    for (std::size_t start = 0; start < n; start += hp.batch_size) {
      const std::size_t end = std::min(n, start + hp.batch_size);
      std::span<const std::size_t> rows(order.data() + start, end - start);
      Var loss = mse(mlp.forward(Var(gather_rows(inputs, rows))), gather_rows(targets, rows));
      const double v = loss.value().item_real();
      if (!std::isfinite(v)) {
        throw NumericError("non-finite regression loss at epoch " + std::to_string(epoch));
      }
      s += v * static_cast<double>(end - start);
      optimizer->step(params, backward(loss, params));
    }
    losses.push_back(s / static_cast<double>(n));
  }
  return losses;
}

}  // namespace hnn
