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

// Curvature measurements on a trained network.
//
// The cheap path is sc_proxy_batch: a closed-form strong-convexity score that
// only needs the penultimate activations and the classifier weights,
//
//   proxy(batch) = ||A_{L-1}||_F / (m_b * ||W_L||_F),
//
// and mu_max, its maximum over a fixed mini-batch partition. The expensive
// paths (finite-difference Hessians, sharpness by projected ascent) exist to
// check the proxy against.

#ifndef AHSC_CONVEXITY_H_
#define AHSC_CONVEXITY_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ahsc/data.h"
#include "ahsc/linalg.h"
#include "ahsc/nn.h"

namespace ahsc {

enum class ProxyDenominator {
  // ||W_L||_F over the whole classifier matrix.
  kFullMatrix,
  // Per-class reading: inf_j ||A|| / ||W_L[j, :]||, i.e. the largest row norm.
  kPerClassRow,
};

struct ConvexityRecord {
  int config_id = 0;
  std::vector<double> per_batch_proxies;
  double mu_max = 0.0;
  bool discarded = true;
};

// Throws kArchitecture when the model has fewer than two layers and
// kDegenerate when the denominator norm is zero.
double sc_proxy_batch(const Model& model, const Batch& batch,
                      ProxyDenominator denom = ProxyDenominator::kFullMatrix);

// Contiguous partition in index order; the record is discarded when
// mu_max <= 0.
ConvexityRecord mu_max(const Model& model, const Dataset& data, std::size_t batch_size,
                       ProxyDenominator denom = ProxyDenominator::kFullMatrix);

using ScalarField = std::function<double(std::span<const double>)>;

inline constexpr double kDefaultHessianEps = 1e-4;

// Forward-difference Hessian
//   H_ij = (f(x + e_i + e_j) - f(x + e_i) - f(x + e_j) + f(x)) / eps^2
// (steps of size eps), then (H + H^T) / 2. Costs n(n+1)/2 + n + 1 calls.
// Throws kNumeric naming the probe when f is not finite.
SymmetricMatrix hessian_fd(const ScalarField& f, std::span<const double> x0,
                           double eps = kDefaultHessianEps);

// Parameter-count ceiling for the last-layer oracle.
inline constexpr std::size_t kOracleParamLimit = 512;

// Mean cross-entropy as a function of the flattened W_L (row-major, class
// major) with every other parameter frozen at its current value. For a
// single-layer model (softmax regression) the frozen inputs are X itself.
ScalarField last_layer_loss(const Model& model, const Batch& batch);

// Frobenius norm of the Hessian of last_layer_loss: the hessian_fd scheme
// applied to each sample's loss, averaged. Throws kSize past
// kOracleParamLimit.
double last_layer_hessian_norm(const Model& model, const Batch& batch,
                               double eps = kDefaultHessianEps);

struct SharpnessParams {
  double epsilon = 1e-3;
  int ascent_iters = 10;
  int restarts = 5;
  std::uint64_t seed = 0;
};

// (max_{||v - w|| <= eps} f(v) - f(w)) / (1 + f(w)), the max estimated by
// projected gradient ascent with central-difference gradients from `restarts`
// random points on the sphere. Always a lower bound on the true value.
double sharpness(const ScalarField& loss, std::span<const double> w, const SharpnessParams& params);

// Sharpness of the mean cross-entropy over all model parameters on `batch`.
double model_sharpness(const Model& model, const Batch& batch, const SharpnessParams& params);

struct CoveringBoundInput {
  double m = 1.0;
  double t = 0.0;
  double beta = 1.0;
  // log N(t/3, F, ||.||_inf)
  double log_cover = 0.0;
};

// min(1, exp(-m t^2 / (18 beta^2) + log_cover)). Throws kData when m < 1,
// t < 0 or beta <= 0.
double covering_bound(const CoveringBoundInput& in);

struct LandscapeGrid {
  std::size_t grid_n = 0;
  double span = 0.0;
  // losses[ix * grid_n + iy]
  std::vector<double> losses;

  double at(std::size_t ix, std::size_t iy) const { return losses[ix * grid_n + iy]; }
  double coordinate(std::size_t i) const;
};

// Loss on theta + a d1 + b d2 for (a, b) on a grid_n x grid_n lattice over
// [-span, span]^2. d1, d2 are Gaussian and filter-normalized: each layer's
// weight block is rescaled to that layer's Frobenius norm, bias blocks are
// zero. The centre cell is the unperturbed loss.
// Throws kData unless grid_n is odd and >= 3 and span > 0.
LandscapeGrid landscape_slice(const Model& model, const Dataset& data, std::size_t grid_n,
                              double span, std::uint64_t seed);

}  // namespace ahsc

#endif  // AHSC_CONVEXITY_H_
