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

#include "ahsc/convexity.h"

#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "ahsc/error.h"
#include "oracles.h"

namespace ahsc {
namespace {

using testing::RandomBatch;
using testing::RandomModel;
using testing::RelativeDifference;
using testing::SoftmaxRegressionHessian;

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no ahsc::Error thrown";
  return ErrorKind::kData;
}

// dims [2, 2, 2] with W1 = I, b1 = 0 so that X = I gives A1 = I.
Model IdentityHiddenModel(const Matrix& w_last) {
  Model m = init_model(std::vector<std::size_t>{2, 2, w_last.rows()}, 0);
  m.weights[0] = Matrix::Identity(2);
  m.weights[1] = w_last;
  return m;
}

Batch IdentityBatch() {
  Batch b;
  b.features = Matrix::Identity(2);
  b.labels = {0, 1};
  return b;
}

TEST(ScProxy, HandExample) {
  const Model m = IdentityHiddenModel(Matrix::FromRows({{2, 0}, {0, 0}}));
  EXPECT_DOUBLE_EQ(sc_proxy_batch(m, IdentityBatch()), std::sqrt(2.0) / 4.0);
  EXPECT_NEAR(sc_proxy_batch(m, IdentityBatch()), 0.353553, 1e-6);
}

TEST(ScProxy, PerClassRowDenominator) {
  // Row norms 5 and 1: the per-class reading divides by the largest.
  const Model m = IdentityHiddenModel(Matrix::FromRows({{3, 4}, {0, 1}}));
  EXPECT_DOUBLE_EQ(sc_proxy_batch(m, IdentityBatch(), ProxyDenominator::kPerClassRow),
                   std::sqrt(2.0) / (2.0 * 5.0));
  EXPECT_DOUBLE_EQ(sc_proxy_batch(m, IdentityBatch(), ProxyDenominator::kFullMatrix),
                   std::sqrt(2.0) / (2.0 * std::sqrt(26.0)));
}

TEST(ScProxy, DoublingLastLayerHalvesExactly) {
  Model m = RandomModel({4, 6, 3}, 5);
  const Batch b = RandomBatch(7, 4, 3, 6);
  const double p = sc_proxy_batch(m, b);
  for (double& v : m.weights.back().entries()) v *= 2.0;
  EXPECT_EQ(sc_proxy_batch(m, b), p / 2.0);
}

TEST(ScProxy, HomogeneityWithinFourUlp) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Model m = RandomModel({5, 7, 6, 3}, seed);
    const Batch b = RandomBatch(6, 5, 3, seed + 50);
    const double p = sc_proxy_batch(m, b);
    for (double c : {0.5, 2.0, 10.0}) {
      Model scaled = m;
      for (double& v : scaled.weights.back().entries()) v *= c;
      EXPECT_LE(testing::UlpDistance(sc_proxy_batch(scaled, b), p / c), 4u)
          << "seed " << seed << " c " << c;
    }
  }
}

Model DeadModel() {
  Model m = RandomModel({3, 5, 2}, 9);
  std::fill(m.weights[0].entries().begin(), m.weights[0].entries().end(), 0.0);
  std::fill(m.biases[0].begin(), m.biases[0].end(), -1.0);
  return m;
}

TEST(ScProxy, DeadActivationsGiveZero) {
  EXPECT_EQ(sc_proxy_batch(DeadModel(), RandomBatch(4, 3, 2, 1)), 0.0);
}

TEST(ScProxy, Errors) {
  const Model single = RandomModel({3, 2}, 1);
  const Batch b = RandomBatch(4, 3, 2, 1);
  EXPECT_EQ(KindOf([&] { sc_proxy_batch(single, b); }), ErrorKind::kArchitecture);
  Model zero_head = RandomModel({3, 4, 2}, 1);
  std::fill(zero_head.weights[1].entries().begin(), zero_head.weights[1].entries().end(), 0.0);
  EXPECT_EQ(KindOf([&] { sc_proxy_batch(zero_head, b); }), ErrorKind::kDegenerate);
}

Dataset ToDataset(const Batch& b, int k) {
  Dataset d;
  d.features = b.features;
  d.labels = b.labels;
  d.num_classes = k;
  return d;
}

TEST(MuMax, SingleBatchEqualsWholeSetProxy) {
  const Model m = RandomModel({4, 6, 3}, 2);
  const Batch b = RandomBatch(10, 4, 3, 3);
  const Dataset d = ToDataset(b, 3);
  for (std::size_t bs : {10u, 11u, 1000u}) {
    const ConvexityRecord r = mu_max(m, d, bs);
    ASSERT_EQ(r.per_batch_proxies.size(), 1u);
    EXPECT_EQ(r.mu_max, sc_proxy_batch(m, b));
  }
}

TEST(MuMax, IsMaxOverContiguousPartition) {
  const Model m = RandomModel({4, 6, 3}, 2);
  const Dataset d = ToDataset(RandomBatch(10, 4, 3, 3), 3);
  const ConvexityRecord r = mu_max(m, d, 4);
  ASSERT_EQ(r.per_batch_proxies.size(), 3u);
  const auto parts = batches(d, 4);
  double best = 0.0;
  // Visit the fixed partition back to front: the max does not care.
  for (std::size_t i = parts.size(); i-- > 0;) {
    const double p = sc_proxy_batch(m, gather(d, parts[i]));
    EXPECT_EQ(r.per_batch_proxies[i], p);
    best = std::max(best, p);
  }
  EXPECT_EQ(r.mu_max, best);
  EXPECT_FALSE(r.discarded);
}

TEST(MuMax, DeadNetworkIsDiscarded) {
  const ConvexityRecord r = mu_max(DeadModel(), ToDataset(RandomBatch(9, 3, 2, 1), 2), 4);
  EXPECT_EQ(r.mu_max, 0.0);
  EXPECT_TRUE(r.discarded);
}

TEST(HessianFd, RecoversQuadratic) {
  const ScalarField f = [](std::span<const double> x) {
    return 0.5 * (2.0 * x[0] * x[0] + 5.0 * x[1] * x[1]);
  };
  const std::vector<double> x0{0.3, -0.7};
  const SymmetricMatrix h = hessian_fd(f, x0);
  EXPECT_NEAR(h(0, 0), 2.0, 1e-3);
  EXPECT_NEAR(h(1, 1), 5.0, 1e-3);
  EXPECT_NEAR(h(0, 1), 0.0, 1e-3);
}

TEST(HessianFd, AffineGivesZero) {
  const ScalarField f = [](std::span<const double> x) { return 3.0 * x[0] - 2.0 * x[1] + x[2] + 4.0; };
  const std::vector<double> x0{0.1, 0.2, 0.3};
  const SymmetricMatrix h = hessian_fd(f, x0);
  for (double v : h.matrix().entries()) EXPECT_NEAR(v, 0.0, 1e-6);
}

TEST(HessianFd, ExactlySymmetric) {
  const ScalarField f = [](std::span<const double> x) {
    return std::sin(x[0] * x[1]) + std::exp(0.3 * x[2]) * x[0];
  };
  const std::vector<double> x0{0.4, -1.1, 0.8};
  const SymmetricMatrix h = hessian_fd(f, x0);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(h(i, j), h(j, i));
  }
}

TEST(HessianFd, NonFiniteNamesProbe) {
  const ScalarField f = [](std::span<const double> x) { return x[1] > 1.0 ? std::nan("") : 0.0; };
  const std::vector<double> x0{0.0, 1.0 - 5e-5};
  try {
    hessian_fd(f, x0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
    EXPECT_NE(std::string(e.what()).find("probe"), std::string::npos);
  }
}

double FrobeniusDistance(const Matrix& a, const Matrix& b) {
  return frobenius_norm(Add(a, Scaled(b, -1.0)));
}

TEST(LastLayerOracle, SoftmaxRegressionMatchesClosedForm) {
  const Model m = RandomModel({10, 3}, 21);
  const Batch b = RandomBatch(10, 10, 3, 22);
  const Matrix closed = SoftmaxRegressionHessian(m, b);
  const std::vector<double> w(m.weights[0].entries().begin(), m.weights[0].entries().end());
  const SymmetricMatrix fd = hessian_fd(last_layer_loss(m, b), w);
  EXPECT_LE(FrobeniusDistance(fd.matrix(), closed) / frobenius_norm(closed), 1e-3);
  EXPECT_LE(RelativeDifference(last_layer_hessian_norm(m, b), frobenius_norm(closed)), 1e-3);
}

TEST(LastLayerOracle, DeepModelMatchesClosedFormOnPenultimateActivations) {
  const Model m = RandomModel({4, 6, 5, 3}, 31);
  const Batch b = RandomBatch(8, 4, 3, 32);
  // Softmax regression on A_{L-1} with the same head.
  Model head;
  head.layer_dims = {5, 3};
  head.weights = {m.weights.back()};
  head.biases = {m.biases.back()};
  Batch penultimate{hidden_activations(m, b.features, 2), b.labels};
  const Matrix closed = SoftmaxRegressionHessian(head, penultimate);
  EXPECT_LE(RelativeDifference(last_layer_hessian_norm(m, b), frobenius_norm(closed)), 1e-3);
}

TEST(LastLayerOracle, LossMatchesForwardAtCurrentWeights) {
  const Model m = RandomModel({4, 6, 3}, 3);
  const Batch b = RandomBatch(8, 4, 3, 4);
  const std::vector<double> w(m.weights.back().entries().begin(), m.weights.back().entries().end());
  EXPECT_NEAR(last_layer_loss(m, b)(w), loss_ce(forward(m, b.features).probabilities(), b.labels),
              1e-14);
}

TEST(LastLayerOracle, DuplicationAndOrderInvariance) {
  const Model m = RandomModel({4, 6, 3}, 41);
  const Batch b = RandomBatch(6, 4, 3, 42);
  const double base = last_layer_hessian_norm(m, b);

  Batch doubled;
  doubled.features = Matrix(12, 4);
  Batch reversed;
  reversed.features = Matrix(6, 4);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 4; ++j) doubled.features(i, j) = b.features(i % 6, j);
    doubled.labels.push_back(b.labels[i % 6]);
  }
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 4; ++j) reversed.features(i, j) = b.features(5 - i, j);
    reversed.labels.push_back(b.labels[5 - i]);
  }
  EXPECT_NEAR(last_layer_hessian_norm(m, doubled), base, 1e-9);
  EXPECT_NEAR(last_layer_hessian_norm(m, reversed), base, 1e-9);
}

TEST(LastLayerOracle, SizeLimitNamesWidth) {
  const Model m = RandomModel({2, 300, 2}, 1);
  const Batch b = RandomBatch(3, 2, 2, 1);
  try {
    last_layer_hessian_norm(m, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSize);
    EXPECT_NE(std::string(e.what()).find("300"), std::string::npos) << e.what();
  }
}

TEST(LastLayerOracle, NormSandwich) {
  const Model m = RandomModel({4, 8, 3}, 51);
  const Batch b = RandomBatch(8, 4, 3, 52);
  const std::vector<double> w(m.weights.back().entries().begin(), m.weights.back().entries().end());
  const Matrix h = hessian_fd(last_layer_loss(m, b), w).matrix();
  const double spec = spectral_norm(h).value;
  const double frob = frobenius_norm(h);
  const double rank = static_cast<double>(numerical_rank(h, 1e-6));
  EXPECT_LE(spec, frob + 1e-9);
  EXPECT_LE(frob, std::sqrt(rank) * spec + 1e-9);
}

TEST(Sharpness, ConstantLossIsZero) {
  const ScalarField f = [](std::span<const double>) { return 1.5; };
  const std::vector<double> w{0.0, 1.0, 2.0};
  EXPECT_EQ(sharpness(f, w, SharpnessParams{}), 0.0);
}

TEST(Sharpness, QuadraticTopEigenvector) {
  const ScalarField f = [](std::span<const double> x) {
    return 0.5 * (x[0] * x[0] + 9.0 * x[1] * x[1]);
  };
  const std::vector<double> w{0.0, 0.0};
  SharpnessParams p;
  p.epsilon = 0.1;
  p.restarts = 5;
  p.ascent_iters = 10;
  const double zeta = sharpness(f, w, p);
  EXPECT_NEAR(zeta, 0.045, 0.02 * 0.045);
  EXPECT_LE(zeta, 0.045 * (1.0 + 1e-9));
}

TEST(Sharpness, NondecreasingInRadius) {
  const Model m = RandomModel({3, 5, 2}, 61);
  const Batch b = RandomBatch(8, 3, 2, 62);
  SharpnessParams p;
  p.epsilon = 1e-3;
  const double small = model_sharpness(m, b, p);
  p.epsilon = 2e-3;
  EXPECT_GE(model_sharpness(m, b, p), small);
  EXPECT_GE(small, 0.0);
}

TEST(Sharpness, RejectsBadParams) {
  const ScalarField f = [](std::span<const double>) { return 0.0; };
  const std::vector<double> w{0.0};
  SharpnessParams p;
  p.epsilon = 0.0;
  EXPECT_THROW(sharpness(f, w, p), Error);
}

TEST(CoveringBound, Examples) {
  EXPECT_EQ(covering_bound({1.0, 0.0, 1.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(covering_bound({18.0, 1.0, 1.0, 1.0}), 1.0);
  EXPECT_NEAR(covering_bound({180.0, 1.0, 1.0, 1.0}), std::exp(-9.0), 1e-8 * std::exp(-9.0));
  EXPECT_NEAR(std::exp(-9.0), 1.2341e-4, 1e-8);
}

TEST(CoveringBound, Monotone) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const CoveringBoundInput in{1.0 + 200.0 * u(rng), 2.0 * u(rng), 0.1 + 2.0 * u(rng), 5.0 * u(rng)};
    const double base = covering_bound(in);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 1.0);
    auto with = [&](auto mutate) {
      CoveringBoundInput c = in;
      mutate(c);
      return covering_bound(c);
    };
    EXPECT_LE(with([](auto& c) { c.m *= 1.5; }), base);
    EXPECT_LE(with([](auto& c) { c.t += 0.1; }), base);
    EXPECT_GE(with([](auto& c) { c.beta *= 1.5; }), base);
    EXPECT_GE(with([](auto& c) { c.log_cover += 0.5; }), base);
  }
}

TEST(CoveringBound, RejectsInvalid) {
  EXPECT_THROW(covering_bound({0.5, 0.1, 1.0, 0.0}), Error);
  EXPECT_THROW(covering_bound({10.0, -0.1, 1.0, 0.0}), Error);
  EXPECT_THROW(covering_bound({10.0, 0.1, 0.0, 0.0}), Error);
}

TEST(Landscape, CentreShapeAndDeterminism) {
  const Model m = RandomModel({3, 6, 3}, 81);
  const Dataset d = ToDataset(RandomBatch(20, 3, 3, 82), 3);
  const LandscapeGrid g = landscape_slice(m, d, 7, 0.5, 3);
  ASSERT_EQ(g.losses.size(), 49u);
  EXPECT_EQ(g.coordinate(3), 0.0);
  EXPECT_DOUBLE_EQ(g.coordinate(0), -0.5);
  EXPECT_DOUBLE_EQ(g.coordinate(6), 0.5);
  EXPECT_NEAR(g.at(3, 3), loss_ce(forward(m, d.features).probabilities(), d.labels), 1e-12);
  EXPECT_EQ(landscape_slice(m, d, 7, 0.5, 3).losses, g.losses);
  EXPECT_NE(landscape_slice(m, d, 7, 0.5, 4).losses, g.losses);
}

TEST(Landscape, RejectsBadGrid) {
  const Model m = RandomModel({3, 6, 3}, 81);
  const Dataset d = ToDataset(RandomBatch(5, 3, 3, 82), 3);
  EXPECT_THROW(landscape_slice(m, d, 4, 0.5, 1), Error);
  EXPECT_THROW(landscape_slice(m, d, 1, 0.5, 1), Error);
  EXPECT_THROW(landscape_slice(m, d, 5, 0.0, 1), Error);
}

}  // namespace
}  // namespace ahsc
