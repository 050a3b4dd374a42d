// Copyright 2026 The AHSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ahsc/nn.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ahsc/error.h"
#include "ahsc/metrics.h"
#include "ahsc/random.h"

namespace ahsc {

namespace {

std::string Dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Z = A W^T + 1 b^T
Matrix Affine(const Matrix& a, const Matrix& w, const std::vector<double>& b) {
  Matrix z = MatMulNT(a, w);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b[j];
  }
  return z;
}

Matrix Relu(const Matrix& z) {
  Matrix a = z;
  for (double& x : a.entries()) x = x > 0.0 ? x : 0.0;
  return a;
}

void CheckInput(const Model& model, const Matrix& x) {
  if (model.weights.empty()) Fail(ErrorKind::kShape, "model has no layers");
  if (x.cols() != model.num_inputs()) {
    Fail(ErrorKind::kShape, "input has " + std::to_string(x.cols()) + " columns, model expects " +
                                std::to_string(model.num_inputs()));
  }
}

bool AllFinite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::size_t Model::num_parameters() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) total += weights[l].size() + biases[l].size();
  return total;
}

void Model::Validate() const {
  if (layer_dims.size() < 2) Fail(ErrorKind::kShape, "model needs at least one layer");
  if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size()) {
    Fail(ErrorKind::kShape, "layer count does not match layer_dims");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l] ||
        biases[l].size() != layer_dims[l + 1]) {
      Fail(ErrorKind::kShape, "layer " + std::to_string(l + 1) + " has W " + Dims(weights[l]) +
                                  ", expected " + std::to_string(layer_dims[l + 1]) + "x" +
                                  std::to_string(layer_dims[l]));
    }
    if (!weights[l].all_finite() || !AllFinite(biases[l])) {
      Fail(ErrorKind::kShape, "layer " + std::to_string(l + 1) + " has non-finite parameters");
    }
  }
}

Gradients Gradients::ZerosLike(const Model& model) {
  Gradients g;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    g.d_weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
    g.d_biases.emplace_back(model.biases[l].size(), 0.0);
  }
  return g;
}

AdamState AdamState::ForModel(const Model& model) {
  AdamState s;
  s.first_moment = Gradients::ZerosLike(model);
  s.second_moment = Gradients::ZerosLike(model);
  return s;
}

Model init_model(std::span<const std::size_t> layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) {
    Fail(ErrorKind::kShape, "need at least input and output dims, got " +
                                std::to_string(layer_dims.size()));
  }
  for (std::size_t d : layer_dims) {
    if (d == 0) Fail(ErrorKind::kShape, "layer dims must be >= 1");
  }
  Model model;
  model.layer_dims.assign(layer_dims.begin(), layer_dims.end());
  Rng rng(DeriveSeed(seed, StreamTag::kInit));
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t fan_in = layer_dims[l];
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    Matrix w(layer_dims[l + 1], fan_in);
    for (double& x : w.entries()) x = normal(rng);
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(layer_dims[l + 1], 0.0);
  }
  return model;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto row = p.row(i);
    const double top = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& x : row) {
      x = std::exp(x - top);
      total += x;
    }
    for (double& x : row) x /= total;
  }
  return p;
}

ForwardCache forward(const Model& model, const Matrix& x) {
  CheckInput(model, x);
  ForwardCache cache;
  cache.activations.push_back(x);
  const std::size_t num_layers = model.num_layers();
  for (std::size_t l = 0; l < num_layers; ++l) {
    Matrix z = Affine(cache.activations.back(), model.weights[l], model.biases[l]);
    Matrix a = l + 1 == num_layers ? softmax_rows(z) : Relu(z);
    cache.pre_activations.push_back(std::move(z));
    cache.activations.push_back(std::move(a));
  }
  return cache;
}

Matrix hidden_activations(const Model& model, const Matrix& x, std::size_t layer) {
  CheckInput(model, x);
  if (layer >= model.num_layers()) {
    Fail(ErrorKind::kShape, "hidden layer " + std::to_string(layer) + " requested from a " +
                                std::to_string(model.num_layers()) + "-layer model");
  }
  Matrix a = x;
  for (std::size_t l = 0; l < layer; ++l) a = Relu(Affine(a, model.weights[l], model.biases[l]));
  return a;
}

Matrix predict_proba(const Model& model, const Matrix& x) {
  CheckInput(model, x);
  Matrix a = x;
  const std::size_t num_layers = model.num_layers();
  for (std::size_t l = 0; l < num_layers; ++l) {
    Matrix z = Affine(a, model.weights[l], model.biases[l]);
    a = l + 1 == num_layers ? softmax_rows(z) : Relu(z);
  }
  return a;
}

double loss_ce(const Matrix& probs, std::span<const int> labels) {
  if (probs.rows() != labels.size()) {
    Fail(ErrorKind::kShape, std::to_string(probs.rows()) + " probability rows for " +
                                std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) Fail(ErrorKind::kData, "loss of an empty batch");
  const auto k = static_cast<int>(probs.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= k) {
      Fail(ErrorKind::kLabel, "label " + std::to_string(y) + " at row " + std::to_string(i) +
                                  " outside [0," + std::to_string(k) + ")");
    }
    total -= std::log(std::max(probs(i, static_cast<std::size_t>(y)), kProbabilityFloor));
  }
  return total / static_cast<double>(labels.size());
}

Gradients backward(const Model& model, const ForwardCache& cache, std::span<const int> labels) {
  const std::size_t num_layers = model.num_layers();
  if (cache.activations.size() != num_layers + 1 ||
      cache.pre_activations.size() != num_layers) {
    Fail(ErrorKind::kShape, "forward cache has " + std::to_string(cache.pre_activations.size()) +
                                " layers, model has " + std::to_string(num_layers));
  }
  const std::size_t m = labels.size();
  for (std::size_t l = 0; l <= num_layers; ++l) {
    const Matrix& a = cache.activations[l];
    if (a.rows() != m || a.cols() != model.layer_dims[l]) {
      Fail(ErrorKind::kShape, "cache activation " + std::to_string(l) + " is " + Dims(a) +
                                  ", expected " + std::to_string(m) + "x" +
                                  std::to_string(model.layer_dims[l]));
    }
  }
  if (m == 0) Fail(ErrorKind::kData, "backward on an empty batch");

  const std::size_t k = model.num_classes();
  Matrix delta = cache.probabilities();
  for (std::size_t i = 0; i < m; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      Fail(ErrorKind::kLabel, "label " + std::to_string(y) + " outside [0," + std::to_string(k) +
                                  ")");
    }
    delta(i, static_cast<std::size_t>(y)) -= 1.0;
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  for (double& x : delta.entries()) x *= inv_m;

  Gradients g = Gradients::ZerosLike(model);
  for (std::size_t l = num_layers; l-- > 0;) {
    g.d_weights[l] = MatMulTN(delta, cache.activations[l]);
    auto& db = g.d_biases[l];
    for (std::size_t i = 0; i < m; ++i) {
      const auto row = delta.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) db[j] += row[j];
    }
    if (l == 0) break;
    Matrix next = MatMul(delta, model.weights[l]);
    const Matrix& z = cache.pre_activations[l - 1];
    for (std::size_t t = 0; t < next.size(); ++t) {
      if (!(z.entries()[t] > 0.0)) next.entries()[t] = 0.0;
    }
    delta = std::move(next);
  }
  return g;
}

void adam_step_in_place(Model& model, const Gradients& grads, AdamState& state, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    Fail(ErrorKind::kNumeric, "learning rate must be finite and >= 0");
  }
  const std::size_t num_layers = model.num_layers();
  if (grads.d_weights.size() != num_layers || grads.d_biases.size() != num_layers) {
    Fail(ErrorKind::kShape, "gradient layer count does not match model");
  }
  for (std::size_t l = 0; l < num_layers; ++l) {
    if (grads.d_weights[l].rows() != model.weights[l].rows() ||
        grads.d_weights[l].cols() != model.weights[l].cols() ||
        grads.d_biases[l].size() != model.biases[l].size()) {
      Fail(ErrorKind::kShape, "gradient shape mismatch at layer " + std::to_string(l + 1));
    }
    if (!grads.d_weights[l].all_finite() || !AllFinite(grads.d_biases[l])) {
      Fail(ErrorKind::kNumeric, "non-finite gradient at layer " + std::to_string(l + 1));
    }
  }
  if (state.first_moment.d_weights.size() != num_layers) state = AdamState::ForModel(model);

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);

  auto update = [&](std::span<double> params, std::span<const double> g, std::span<double> m1,
                    std::span<double> m2) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m1[i] = b1 * m1[i] + (1.0 - b1) * g[i];
      m2[i] = b2 * m2[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m1[i] / correction1;
      const double v_hat = m2[i] / correction2;
      params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  };
  for (std::size_t l = 0; l < num_layers; ++l) {
    update(model.weights[l].entries(), grads.d_weights[l].entries(),
           state.first_moment.d_weights[l].entries(), state.second_moment.d_weights[l].entries());
    update(model.biases[l], grads.d_biases[l], state.first_moment.d_biases[l],
           state.second_moment.d_biases[l]);
  }
}

AdamResult adam_step(Model model, const Gradients& grads, AdamState state, double lr) {
  adam_step_in_place(model, grads, state, lr);
  return {std::move(model), std::move(state)};
}

TrainResult train(Model model, const Dataset& data, const HyperConfig& hp, std::size_t epochs,
                  bool early_stop_on_fit, std::uint64_t seed) {
  if (data.num_samples() == 0) Fail(ErrorKind::kData, "cannot train on an empty dataset");
  if (hp.batch_size < 1) Fail(ErrorKind::kData, "batch size must be >= 1");
  CheckInput(model, data.features);

  TrainResult result{std::move(model), {}};
  AdamState state = AdamState::ForModel(result.model);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const auto plan = batches(data, static_cast<std::size_t>(hp.batch_size),
                              DeriveSeed(seed, StreamTag::kShuffle, epoch));
    for (const auto& idx : plan) {
      const Batch b = gather(data, idx);
      const ForwardCache cache = forward(result.model, b.features);
      const Gradients g = backward(result.model, cache, b.labels);
      adam_step_in_place(result.model, g, state, hp.learning_rate);
    }
    const Matrix probs = predict_proba(result.model, data.features);
    const double acc = accuracy(probs, data.labels);
    result.history.loss.push_back(loss_ce(probs, data.labels));
    result.history.accuracy.push_back(acc);
    if (early_stop_on_fit && acc == 1.0) {
      result.history.stopped_early = true;
      break;
    }
  }
  return result;
}

std::vector<double> flatten_parameters(const Model& model) {
  std::vector<double> out;
  out.reserve(model.num_parameters());
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const auto w = model.weights[l].entries();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), model.biases[l].begin(), model.biases[l].end());
  }
  return out;
}

Model unflatten_parameters(const Model& shape, std::span<const double> params) {
  if (params.size() != shape.num_parameters()) {
    Fail(ErrorKind::kShape, "expected " + std::to_string(shape.num_parameters()) +
                                " parameters, got " + std::to_string(params.size()));
  }
  Model out = shape;
  std::size_t pos = 0;
  for (std::size_t l = 0; l < out.num_layers(); ++l) {
    auto w = out.weights[l].entries();
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(pos), w.size(), w.begin());
    pos += w.size();
    auto& b = out.biases[l];
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(pos), b.size(), b.begin());
    pos += b.size();
  }
  return out;
}

}  // namespace ahsc
