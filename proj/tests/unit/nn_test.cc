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

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "ahsc/data.h"
#include "ahsc/error.h"
#include "oracles.h"

namespace ahsc {
namespace {

using testing::CentralDifferenceGradient;
using testing::RandomBatch;
using testing::RandomModel;

Model ZeroModel(const std::vector<std::size_t>& dims) {
  Model m = init_model(dims, 0);
  for (auto& w : m.weights) std::fill(w.entries().begin(), w.entries().end(), 0.0);
  return m;
}

TEST(InitModel, Shapes) {
  const Model m = init_model(std::vector<std::size_t>{4, 8, 3}, 1);
  ASSERT_EQ(m.num_layers(), 2u);
  EXPECT_EQ(m.weights[0].rows(), 8u);
  EXPECT_EQ(m.weights[0].cols(), 4u);
  EXPECT_EQ(m.weights[1].rows(), 3u);
  EXPECT_EQ(m.weights[1].cols(), 8u);
  EXPECT_EQ(m.biases[0].size(), 8u);
  EXPECT_EQ(m.biases[1].size(), 3u);
  EXPECT_EQ(m.num_parameters(), 8u * 4 + 8 + 3 * 8 + 3);
  for (const auto& b : m.biases) {
    for (double v : b) EXPECT_EQ(v, 0.0);
  }
}

TEST(InitModel, SeedDeterminism) {
  const std::vector<std::size_t> dims{4, 8, 3};
  EXPECT_EQ(init_model(dims, 42), init_model(dims, 42));
  EXPECT_NE(init_model(dims, 42), init_model(dims, 43));
}

TEST(InitModel, HeNormalScale) {
  const Model m = init_model(std::vector<std::size_t>{200, 300}, 7);
  double sq = 0.0;
  for (double v : m.weights[0].entries()) sq += v * v;
  const double var = sq / static_cast<double>(m.weights[0].size());
  EXPECT_NEAR(var, 2.0 / 200.0, 0.1 * 2.0 / 200.0);
}

TEST(InitModel, RejectsBadDims) {
  EXPECT_THROW(init_model(std::vector<std::size_t>{}, 0), Error);
  EXPECT_THROW(init_model(std::vector<std::size_t>{4}, 0), Error);
  EXPECT_THROW(init_model(std::vector<std::size_t>{4, 0, 3}, 0), Error);
}

TEST(Forward, ZeroModelIsUniform) {
  const Model m = ZeroModel({5, 6, 3});
  const Batch b = RandomBatch(4, 5, 3, 1);
  const Matrix p = forward(m, b.features).probabilities();
  for (double v : p.entries()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(Forward, RowsSumToOneAndHiddenNonNegative) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Model m = RandomModel({6, 9, 7, 4}, seed);
    const Batch b = RandomBatch(8, 6, 4, seed + 100);
    const ForwardCache c = forward(m, b.features);
    const Matrix& p = c.probabilities();
    for (std::size_t i = 0; i < p.rows(); ++i) {
      const auto row = p.row(i);
      EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
      for (double v : row) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
      }
    }
    for (std::size_t l = 1; l + 1 < c.activations.size(); ++l) {
      for (double v : c.activations[l].entries()) EXPECT_GE(v, 0.0);
    }
  }
}

TEST(Forward, ShapeMismatch) {
  const Model m = RandomModel({3, 4, 2}, 1);
  try {
    forward(m, Matrix(2, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
}

TEST(Forward, SoftmaxShiftInvariance) {
  Model m = RandomModel({4, 5, 3}, 3);
  const Batch b = RandomBatch(6, 4, 3, 4);
  const Matrix p0 = forward(m, b.features).probabilities();
  for (double& v : m.biases.back()) v += 7.25;
  const Matrix p1 = forward(m, b.features).probabilities();
  for (std::size_t i = 0; i < p0.size(); ++i) {
    EXPECT_NEAR(p0.entries()[i], p1.entries()[i], 1e-12);
  }
}

TEST(SoftmaxRows, StableForHugeLogits) {
  const Matrix p = softmax_rows(Matrix::FromRows({{1000.0, 0.0}, {-1000.0, -1000.0}}));
  EXPECT_EQ(p(0, 0), 1.0);
  EXPECT_EQ(p(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(p(1, 0), 0.5);
}

TEST(LossCe, Examples) {
  const std::vector<int> y2{0, 1};
  EXPECT_NEAR(loss_ce(Matrix::FromRows({{0.5, 0.5}, {0.5, 0.5}}), y2), std::log(2.0), 1e-15);
  EXPECT_LE(loss_ce(Matrix::FromRows({{1.0, 0.0}, {0.0, 1.0}}), y2), 1e-11);
  // (ln 2 + ln(4/3)) / 2
  const double expected = (std::log(2.0) + std::log(4.0 / 3.0)) / 2.0;
  EXPECT_NEAR(loss_ce(Matrix::FromRows({{0.5, 0.5}, {0.25, 0.75}}), y2), expected, 1e-15);
  EXPECT_NEAR(expected, 0.490415, 1e-6);
}

TEST(LossCe, FloorAppliesToZeroProbability) {
  const std::vector<int> y{1};
  EXPECT_NEAR(loss_ce(Matrix::FromRows({{1.0, 0.0}}), y), -std::log(kProbabilityFloor), 1e-12);
}

TEST(LossCe, LabelOutOfRange) {
  const std::vector<int> y{2};
  try {
    loss_ce(Matrix::FromRows({{0.5, 0.5}}), y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLabel);
  }
}

TEST(LossCe, PermutationInvariant) {
  const Model m = RandomModel({3, 6, 3}, 8);
  Batch b = RandomBatch(7, 3, 3, 9);
  const double l0 = loss_ce(forward(m, b.features).probabilities(), b.labels);
  std::vector<std::size_t> perm{6, 2, 0, 5, 1, 3, 4};
  Batch shuffled;
  shuffled.features = Matrix(7, 3);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 3; ++j) shuffled.features(i, j) = b.features(perm[i], j);
    shuffled.labels.push_back(b.labels[perm[i]]);
  }
  EXPECT_NEAR(loss_ce(forward(m, shuffled.features).probabilities(), shuffled.labels), l0, 1e-14);
}

TEST(Backward, OutputDeltaAtOrigin) {
  // Zero weights and biases make the logits (0, 0) for any input.
  const Model m = ZeroModel({3, 2});
  Batch b;
  b.features = Matrix::FromRows({{0.3, -1.0, 2.0}});
  b.labels = {0};
  const Gradients g = backward(m, forward(m, b.features), b.labels);
  EXPECT_EQ(g.d_biases[0][0], -0.5);
  EXPECT_EQ(g.d_biases[0][1], 0.5);
}

TEST(Backward, ZeroWhenPredictionsAreExact) {
  Model m = ZeroModel({2, 2});
  m.biases[0] = {1000.0, 0.0};
  Batch b;
  b.features = Matrix::FromRows({{1.0, 2.0}, {-1.0, 0.5}});
  b.labels = {0, 0};
  const Gradients g = backward(m, forward(m, b.features), b.labels);
  for (double v : g.d_weights[0].entries()) EXPECT_EQ(v, 0.0);
  for (double v : g.d_biases[0]) EXPECT_EQ(v, 0.0);
}

TEST(Backward, StaleCacheIsShapeError) {
  const Model a = RandomModel({3, 4, 2}, 1);
  const Model b = RandomModel({3, 5, 2}, 1);
  const Batch batch = RandomBatch(4, 3, 2, 2);
  try {
    backward(b, forward(a, batch.features), batch.labels);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
}

std::vector<double> FlattenGradients(const Gradients& g) {
  std::vector<double> out;
  for (std::size_t l = 0; l < g.d_weights.size(); ++l) {
    out.insert(out.end(), g.d_weights[l].entries().begin(), g.d_weights[l].entries().end());
    out.insert(out.end(), g.d_biases[l].begin(), g.d_biases[l].end());
  }
  return out;
}

// Relative error per coordinate, absolute below 1e-8 in magnitude.
void ExpectGradientMatches(const Model& m, const Batch& b) {
  const auto analytic = FlattenGradients(backward(m, forward(m, b.features), b.labels));
  const auto numeric = CentralDifferenceGradient(m, b, 1e-5);
  ASSERT_EQ(analytic.size(), numeric.size());
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (std::abs(analytic[i]) < 1e-8) {
      EXPECT_NEAR(analytic[i], numeric[i], 1e-8) << "coordinate " << i;
    } else {
      EXPECT_LE(testing::RelativeDifference(analytic[i], numeric[i]), 1e-5) << "coordinate " << i;
    }
  }
}

TEST(Backward, MatchesCentralDifferencesTinyNet) {
  ExpectGradientMatches(RandomModel({3, 4, 2}, 12), RandomBatch(5, 3, 2, 13));
}

TEST(Backward, MatchesCentralDifferencesRandomNets) {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::size_t> layers(2, 6);
  std::uniform_int_distribution<std::size_t> width(1, 16);
  std::uniform_int_distribution<std::size_t> classes(2, 16);
  std::uniform_int_distribution<std::size_t> rows(1, 8);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::size_t> dims{width(rng)};
    const std::size_t l = layers(rng);
    for (std::size_t i = 0; i + 1 < l; ++i) dims.push_back(width(rng));
    dims.push_back(classes(rng));
    const Model m = RandomModel(dims, 500 + trial);
    const Batch b = RandomBatch(rows(rng), dims.front(), static_cast<int>(dims.back()), 900 + trial);
    SCOPED_TRACE("trial " + std::to_string(trial));
    ExpectGradientMatches(m, b);
  }
}

TEST(Adam, ZeroGradientsLeaveParameters) {
  const Model m = RandomModel({3, 4, 2}, 1);
  const auto r = adam_step(m, Gradients::ZerosLike(m), AdamState::ForModel(m), 0.1);
  EXPECT_EQ(r.model, m);
  EXPECT_EQ(r.state.step, 1);
}

TEST(Adam, FirstStepMagnitude) {
  const Model m = RandomModel({3, 4, 2}, 1);
  const Batch b = RandomBatch(6, 3, 2, 2);
  const Gradients g = backward(m, forward(m, b.features), b.labels);
  const double lr = 0.01;
  const auto r = adam_step(m, g, AdamState::ForModel(m), lr);
  const auto before = flatten_parameters(m);
  const auto after = flatten_parameters(r.model);
  const auto grad = FlattenGradients(g);
  for (std::size_t i = 0; i < before.size(); ++i) {
    // m_hat = g, v_hat = g^2 at t = 1.
    const double expected = lr * grad[i] / (std::abs(grad[i]) + 1e-8);
    EXPECT_NEAR(before[i] - after[i], expected, 1e-15);
    if (std::abs(grad[i]) > 1e-4) EXPECT_NEAR(std::abs(before[i] - after[i]), lr, 1e-5 * lr);
  }
}

TEST(Adam, Deterministic) {
  const Model m = RandomModel({3, 4, 2}, 1);
  const Batch b = RandomBatch(6, 3, 2, 2);
  const Gradients g = backward(m, forward(m, b.features), b.labels);
  const auto r1 = adam_step(m, g, AdamState::ForModel(m), 0.01);
  const auto r2 = adam_step(m, g, AdamState::ForModel(m), 0.01);
  EXPECT_EQ(r1.model, r2.model);
  EXPECT_EQ(r1.state.step, r2.state.step);
}

TEST(Adam, NonFiniteGradientNamesLayer) {
  Model m = RandomModel({3, 4, 2}, 1);
  Gradients g = Gradients::ZerosLike(m);
  g.d_weights[1](0, 0) = std::nan("");
  const Model before = m;
  AdamState state = AdamState::ForModel(m);
  try {
    adam_step_in_place(m, g, state, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
    EXPECT_NE(std::string(e.what()).find("layer 2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(m, before);
  EXPECT_EQ(state.step, 0);
}

Dataset TwoBlobs() {
  BlobSpec spec;
  spec.m_per_class = 100;
  spec.k = 2;
  spec.dim = 2;
  spec.separation = 6.0;
  spec.noise_std = 1.0;
  spec.seed = 4;
  return synthetic_blobs(spec);
}

HyperConfig SmallConfig() {
  HyperConfig h;
  h.depth = 1;
  h.width = 8;
  h.batch_size = 16;
  h.learning_rate = 0.01;
  return h;
}

TEST(Train, ZeroEpochs) {
  const Dataset d = TwoBlobs();
  const Model m = init_model(std::vector<std::size_t>{2, 8, 2}, 1);
  const TrainResult r = train(m, d, SmallConfig(), 0, true, 1);
  EXPECT_EQ(r.model, m);
  EXPECT_EQ(r.history.epochs_run(), 0u);
  EXPECT_FALSE(r.history.stopped_early);
}

TEST(Train, FitsSeparatedBlobsAndStopsEarly) {
  const Dataset d = TwoBlobs();
  const TrainResult r =
      train(init_model(std::vector<std::size_t>{2, 8, 2}, 1), d, SmallConfig(), 20, true, 1);
  ASSERT_FALSE(r.history.accuracy.empty());
  EXPECT_EQ(r.history.accuracy.back(), 1.0);
  EXPECT_TRUE(r.history.stopped_early);
  EXPECT_LT(r.history.epochs_run(), 20u);
}

TEST(Train, Deterministic) {
  const Dataset d = TwoBlobs();
  const Model m = init_model(std::vector<std::size_t>{2, 8, 2}, 1);
  const TrainResult a = train(m, d, SmallConfig(), 5, false, 3);
  const TrainResult b = train(m, d, SmallConfig(), 5, false, 3);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.model, b.model);
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  const Dataset d = TwoBlobs();
  const Model m = init_model(std::vector<std::size_t>{2, 8, 2}, 1);
  HyperConfig h = SmallConfig();
  h.learning_rate = 0.0;
  const TrainResult r = train(m, d, h, 3, false, 3);
  EXPECT_EQ(r.model, m);
  EXPECT_EQ(r.history.epochs_run(), 3u);
}

TEST(Train, EmptyDatasetIsDataError) {
  Dataset empty;
  empty.features = Matrix(0, 2);
  empty.num_classes = 2;
  try {
    train(init_model(std::vector<std::size_t>{2, 2}, 1), empty, SmallConfig(), 1, false, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
}

TEST(Parameters, FlattenRoundTrip) {
  const Model m = RandomModel({4, 3, 5, 2}, 6);
  const auto flat = flatten_parameters(m);
  EXPECT_EQ(flat.size(), m.num_parameters());
  EXPECT_EQ(unflatten_parameters(m, flat), m);
  EXPECT_EQ(flat.front(), m.weights[0](0, 0));
  EXPECT_EQ(flat[m.weights[0].size()], m.biases[0][0]);
}

TEST(HiddenActivations, MatchesForwardCache) {
  const Model m = RandomModel({4, 6, 5, 3}, 2);
  const Batch b = RandomBatch(5, 4, 3, 3);
  const ForwardCache c = forward(m, b.features);
  EXPECT_EQ(hidden_activations(m, b.features, 2), c.activations[2]);
  EXPECT_EQ(hidden_activations(m, b.features, 0), b.features);
}

}  // namespace
}  // namespace ahsc
