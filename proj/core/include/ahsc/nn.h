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

// Fully connected ReLU network with a softmax head, trained on mean
// cross-entropy with Adam.
//
// Samples are rows: for a batch X (m x n), layer l computes
//   Z_l = A_{l-1} W_l^T + 1 b_l^T,   A_l = relu(Z_l)  (softmax for the last).
// Layer indices in the API are 1-based to match that notation; vectors are
// stored 0-based, so weights[l - 1] is W_l.

#ifndef AHSC_NN_H_
#define AHSC_NN_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ahsc/data.h"
#include "ahsc/hyper.h"
#include "ahsc/linalg.h"

namespace ahsc {

struct Model {
  // layer_dims[0] = n inputs, layer_dims.back() = k classes.
  std::vector<std::size_t> layer_dims;
  // weights[l] has shape layer_dims[l + 1] x layer_dims[l].
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  std::size_t num_layers() const { return weights.size(); }
  std::size_t num_inputs() const { return layer_dims.front(); }
  std::size_t num_classes() const { return layer_dims.back(); }
  std::size_t num_parameters() const;

  // Throws kShape if the chain of shapes is broken or a parameter is not
  // finite.
  void Validate() const;

  friend bool operator==(const Model&, const Model&) = default;
};

struct ForwardCache {
  // pre_activations[l] is Z_{l+1}; activations[0] is X and activations[l] is
  // A_l, so activations.back() holds the softmax probabilities.
  std::vector<Matrix> pre_activations;
  std::vector<Matrix> activations;

  const Matrix& probabilities() const { return activations.back(); }
};

struct Gradients {
  std::vector<Matrix> d_weights;
  std::vector<std::vector<double>> d_biases;

  static Gradients ZerosLike(const Model& model);
};

struct AdamState {
  Gradients first_moment;
  Gradients second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState ForModel(const Model& model);
};

// He-normal weights (std = sqrt(2 / fan_in)) from a stream keyed by `seed`;
// zero biases. Throws kShape on fewer than two dims or a zero dim.
Model init_model(std::span<const std::size_t> layer_dims, std::uint64_t seed);

// Throws kShape when X has the wrong number of columns.
ForwardCache forward(const Model& model, const Matrix& x);

// Forward pass stopping after hidden layer `layer` (1-based); returns A_layer.
// layer == 0 returns X.
Matrix hidden_activations(const Model& model, const Matrix& x, std::size_t layer);

// Applies the softmax head to precomputed logits, row by row.
Matrix softmax_rows(const Matrix& logits);

inline constexpr double kProbabilityFloor = 1e-12;

// Mean cross-entropy -(1/m) sum_i log max(p_i[y_i], 1e-12).
// Throws kLabel for labels outside [0, k) and kShape on a count mismatch.
double loss_ce(const Matrix& probs, std::span<const int> labels);

// Exact gradient of loss_ce(forward(model, X), y). The output delta is
// (A_L - onehot(y)) / m, then back through the ReLU layers.
// Throws kShape when the cache was not produced by this model on m rows.
Gradients backward(const Model& model, const ForwardCache& cache, std::span<const int> labels);

// Standard bias-corrected Adam. Throws kNumeric naming the 1-based layer whose
// gradient is not finite; `model` and `state` are untouched in that case.
void adam_step_in_place(Model& model, const Gradients& grads, AdamState& state, double lr);

struct AdamResult {
  Model model;
  AdamState state;
};
AdamResult adam_step(Model model, const Gradients& grads, AdamState state, double lr);

struct TrainHistory {
  // Full-pass train loss and accuracy measured after each epoch.
  std::vector<double> loss;
  std::vector<double> accuracy;
  bool stopped_early = false;

  std::size_t epochs_run() const { return loss.size(); }
  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
  Model model;
  TrainHistory history;
};

// Mini-batch Adam using hp.learning_rate and hp.batch_size. Epoch e shuffles
// with a stream derived from (seed, e). With early_stop_on_fit the run ends at
// the first epoch whose train accuracy is 1.
TrainResult train(Model model, const Dataset& data, const HyperConfig& hp, std::size_t epochs,
                  bool early_stop_on_fit, std::uint64_t seed);

Matrix predict_proba(const Model& model, const Matrix& x);

// Parameters in layer order: W_1 row-major, b_1, W_2, b_2, ...
std::vector<double> flatten_parameters(const Model& model);
// Inverse of flatten_parameters using `shape` for the layout.
Model unflatten_parameters(const Model& shape, std::span<const double> params);

}  // namespace ahsc

#endif  // AHSC_NN_H_
