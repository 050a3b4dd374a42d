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

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "ahsc/error.h"
#include "ahsc/random.h"

namespace ahsc {

namespace {

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void CheckProxyArchitecture(const Model& model) {
  if (model.num_layers() < 2) {
    Fail(ErrorKind::kArchitecture,
         "strong-convexity proxy needs a hidden layer before the classifier (L >= 2), got L = " +
             std::to_string(model.num_layers()));
  }
}

double ProxyDenominatorNorm(const Matrix& w_last, ProxyDenominator denom) {
  if (denom == ProxyDenominator::kFullMatrix) return frobenius_norm(w_last);
  double largest = 0.0;
  for (std::size_t j = 0; j < w_last.rows(); ++j) largest = std::max(largest, Norm(w_last.row(j)));
  return largest;
}

// Mean softmax cross-entropy of precomputed logits.
double LogitLoss(const Matrix& logits, std::span<const int> labels) {
  return loss_ce(softmax_rows(logits), labels);
}

}  // namespace

double sc_proxy_batch(const Model& model, const Batch& batch, ProxyDenominator denom) {
  CheckProxyArchitecture(model);
  if (batch.size() == 0) Fail(ErrorKind::kData, "proxy on an empty batch");
  const double denom_norm = ProxyDenominatorNorm(model.weights.back(), denom);
  if (denom_norm == 0.0) Fail(ErrorKind::kDegenerate, "classifier weights have zero norm");
  const Matrix a = hidden_activations(model, batch.features, model.num_layers() - 1);
  return frobenius_norm(a) / (static_cast<double>(batch.size()) * denom_norm);
}

ConvexityRecord mu_max(const Model& model, const Dataset& data, std::size_t batch_size,
                       ProxyDenominator denom) {
  if (batch_size == 0) Fail(ErrorKind::kData, "batch size must be >= 1");
  ConvexityRecord record;
  for (const auto& idx : batches(data.num_samples(), batch_size)) {
    const double proxy = sc_proxy_batch(model, gather(data, idx), denom);
    record.per_batch_proxies.push_back(proxy);
    record.mu_max = std::max(record.mu_max, proxy);
  }
  record.discarded = !(record.mu_max > 0.0);
  return record;
}

SymmetricMatrix hessian_fd(const ScalarField& f, std::span<const double> x0, double eps) {
  if (!(eps > 0.0)) Fail(ErrorKind::kNumeric, "finite-difference step must be > 0");
  const std::size_t n = x0.size();
  std::vector<double> x(x0.begin(), x0.end());

  auto eval = [&](long i, long j) {
    const double v = f(x);
    if (!std::isfinite(v)) {
      Fail(ErrorKind::kNumeric, "non-finite objective at probe (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
    }
    return v;
  };

  const double f0 = eval(-1, -1);
  std::vector<double> fi(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = x0[i] + eps;
    fi[i] = eval(static_cast<long>(i), -1);
    x[i] = x0[i];
  }

  const double inv = 1.0 / (eps * eps);
  Matrix h(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      x[i] = x0[i] + eps;
      x[j] = (i == j ? x0[j] + 2.0 * eps : x0[j] + eps);
      const double fij = eval(static_cast<long>(i), static_cast<long>(j));
      x[i] = x0[i];
      x[j] = x0[j];
      h(i, j) = (fij - fi[i] - fi[j] + f0) * inv;
      h(j, i) = h(i, j);
    }
  }
  return SymmetricMatrix::Symmetrize(h);
}

ScalarField last_layer_loss(const Model& model, const Batch& batch) {
  if (model.num_layers() == 0) Fail(ErrorKind::kShape, "model has no layers");
  if (batch.size() == 0) Fail(ErrorKind::kData, "oracle on an empty batch");

  struct Frozen {
    Matrix penultimate;
    Matrix base_logits;
    std::vector<double> base_weights;
    std::vector<double> bias;
    std::vector<int> labels;
    std::size_t classes = 0;
    std::size_t width = 0;
  };
  auto frozen = std::make_shared<Frozen>();
  const Matrix& w = model.weights.back();
  frozen->penultimate = hidden_activations(model, batch.features, model.num_layers() - 1);
  frozen->base_weights.assign(w.entries().begin(), w.entries().end());
  frozen->bias = model.biases.back();
  frozen->labels = batch.labels;
  frozen->classes = w.rows();
  frozen->width = w.cols();
  frozen->base_logits = MatMulNT(frozen->penultimate, w);
  for (std::size_t i = 0; i < frozen->base_logits.rows(); ++i) {
    auto row = frozen->base_logits.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += frozen->bias[j];
  }

  return [frozen](std::span<const double> flat_w) {
    const std::size_t count = frozen->base_weights.size();
    if (flat_w.size() != count) {
      Fail(ErrorKind::kShape, "last-layer loss expects " + std::to_string(count) +
                                  " weights, got " + std::to_string(flat_w.size()));
    }
    // Probes differ from the base point in a couple of coordinates, so patch
    // the cached logits column-wise instead of redoing the product.
    constexpr std::size_t kPatchLimit = 8;
    std::vector<std::size_t> changed;
    for (std::size_t p = 0; p < count; ++p) {
      if (flat_w[p] != frozen->base_weights[p]) {
        changed.push_back(p);
        if (changed.size() > kPatchLimit) break;
      }
    }
    const Matrix& a = frozen->penultimate;
    if (changed.size() > kPatchLimit) {
      Matrix w(frozen->classes, frozen->width,
               std::vector<double>(flat_w.begin(), flat_w.end()));
      Matrix logits = MatMulNT(a, w);
      for (std::size_t i = 0; i < logits.rows(); ++i) {
        auto row = logits.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += frozen->bias[j];
      }
      return LogitLoss(logits, frozen->labels);
    }
    Matrix logits = frozen->base_logits;
    for (std::size_t p : changed) {
      const std::size_t j = p / frozen->width;
      const std::size_t c = p % frozen->width;
      const double delta = flat_w[p] - frozen->base_weights[p];
      for (std::size_t i = 0; i < logits.rows(); ++i) logits(i, j) += delta * a(i, c);
    }
    return LogitLoss(logits, frozen->labels);
  };
}

double last_layer_hessian_norm(const Model& model, const Batch& batch, double eps) {
  if (model.num_layers() == 0) Fail(ErrorKind::kShape, "model has no layers");
  const Matrix& w = model.weights.back();
  if (w.size() > kOracleParamLimit) {
    Fail(ErrorKind::kSize, "last-layer oracle limited to " + std::to_string(kOracleParamLimit) +
                               " weights; classifier is " + std::to_string(w.rows()) + "x" +
                               std::to_string(w.cols()) + " (width " + std::to_string(w.cols()) +
                               ")");
  }
  if (batch.size() == 0) Fail(ErrorKind::kData, "oracle on an empty batch");
  if (!(eps > 0.0)) Fail(ErrorKind::kNumeric, "finite-difference step must be > 0");
  // Mean of per-sample forward-difference Hessians (the hessian_fd scheme on
  // each sample's loss), summed in extended precision so the result does not
  // depend on sample order or multiplicity. A probe on W[c, j] only moves
  // logit c by eps * a_j, so every probe costs O(k).
  const std::size_t k = w.rows();
  const std::size_t d = w.cols();
  const std::size_t n = w.size();
  const std::vector<double>& bias = model.biases.back();
  std::vector<long double> sum(n * n, 0.0L);
  std::vector<double> z0(k);
  std::vector<double> z(k);
  std::vector<double> fi(n);
  Matrix row(1, batch.features.cols());
  auto sample_loss = [&](int y, long i, long j) {
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double v : z) total += std::exp(v - top);
    const double p = std::exp(z[static_cast<std::size_t>(y)] - top) / total;
    const double v = -std::log(std::max(p, kProbabilityFloor));
    if (!std::isfinite(v)) {
      Fail(ErrorKind::kNumeric, "non-finite objective at probe (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
    }
    return v;
  };
  for (std::size_t s = 0; s < batch.size(); ++s) {
    std::copy(batch.features.row(s).begin(), batch.features.row(s).end(), row.row(0).begin());
    const Matrix a = hidden_activations(model, row, model.num_layers() - 1);
    const int y = batch.labels[s];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      Fail(ErrorKind::kLabel, "label " + std::to_string(y) + " at row " + std::to_string(s) +
                                  " outside [0," + std::to_string(k) + ")");
    }
    for (std::size_t c = 0; c < k; ++c) {
      double acc = bias[c];
      for (std::size_t j = 0; j < d; ++j) acc += w(c, j) * a(0, j);
      z0[c] = acc;
    }
    z = z0;
    const double f0 = sample_loss(y, -1, -1);
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t c = p / d;
      z[c] = z0[c] + eps * a(0, p % d);
      fi[p] = sample_loss(y, static_cast<long>(p), -1);
      z[c] = z0[c];
    }
    const double inv = 1.0 / (eps * eps);
    for (std::size_t p = 0; p < n; ++p) {
      // A zero activation leaves the whole row and column exactly zero.
      if (a(0, p % d) == 0.0) continue;
      const std::size_t cp = p / d;
      for (std::size_t q = p; q < n; ++q) {
        const std::size_t cq = q / d;
        if (a(0, q % d) == 0.0) continue;
        z[cp] += eps * a(0, p % d);
        z[cq] += eps * a(0, q % d);
        const double fpq = sample_loss(y, static_cast<long>(p), static_cast<long>(q));
        z[cp] = z0[cp];
        z[cq] = z0[cq];
        const long double h = (fpq - fi[p] - fi[q] + f0) * inv;
        sum[p * n + q] += h;
        if (q != p) sum[q * n + p] += h;
      }
    }
  }
  Matrix mean(n, n);
  const auto m = static_cast<long double>(batch.size());
  for (std::size_t p = 0; p < n * n; ++p) mean.entries()[p] = static_cast<double>(sum[p] / m);
  return frobenius_norm(mean);
}

double sharpness(const ScalarField& loss, std::span<const double> w,
                 const SharpnessParams& params) {
  if (!(params.epsilon > 0.0)) Fail(ErrorKind::kData, "sharpness radius must be > 0");
  if (params.ascent_iters < 1 || params.restarts < 1) {
    Fail(ErrorKind::kData, "sharpness needs ascent_iters >= 1 and restarts >= 1");
  }
  const std::size_t n = w.size();
  const double eps = params.epsilon;
  const double h = eps * 1e-3;
  const double f_w = loss(w);
  double best = f_w;

  Rng rng(DeriveSeed(params.seed, StreamTag::kSharpness));
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  std::vector<double> probe(n);
  std::vector<double> grad(n);

  auto at = [&](const std::vector<double>& offset) {
    for (std::size_t i = 0; i < n; ++i) probe[i] = w[i] + offset[i];
    return loss(probe);
  };
  auto rescale_into_ball = [&] {
    const double norm = Norm(v);
    if (norm > eps) {
      for (double& x : v) x *= eps / norm;
    }
  };

  for (int r = 0; r < params.restarts; ++r) {
    for (double& x : v) x = normal(rng);
    const double norm = Norm(v);
    if (norm == 0.0) continue;
    for (double& x : v) x *= eps / norm;
    best = std::max(best, at(v));

    for (int it = 0; it < params.ascent_iters; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> shifted = v;
        shifted[i] = v[i] + h;
        const double up = at(shifted);
        shifted[i] = v[i] - h;
        const double down = at(shifted);
        grad[i] = (up - down) / (2.0 * h);
      }
      const double gnorm = Norm(grad);
      if (!(gnorm > 0.0)) break;
      // A step of one ball diameter, then projection back onto the ball.
      for (std::size_t i = 0; i < n; ++i) v[i] += 2.0 * eps * grad[i] / gnorm;
      rescale_into_ball();
      best = std::max(best, at(v));
    }
  }
  return (best - f_w) / (1.0 + f_w);
}

double model_sharpness(const Model& model, const Batch& batch, const SharpnessParams& params) {
  const std::vector<double> theta = flatten_parameters(model);
  ScalarField loss = [&](std::span<const double> p) {
    const Model perturbed = unflatten_parameters(model, p);
    return loss_ce(predict_proba(perturbed, batch.features), batch.labels);
  };
  return sharpness(loss, theta, params);
}

double covering_bound(const CoveringBoundInput& in) {
  if (!(in.m >= 1.0)) Fail(ErrorKind::kData, "covering bound needs m >= 1");
  if (!(in.t >= 0.0)) Fail(ErrorKind::kData, "covering bound needs t >= 0");
  if (!(in.beta > 0.0)) Fail(ErrorKind::kData, "covering bound needs beta > 0");
  const double exponent = -in.m * in.t * in.t / (18.0 * in.beta * in.beta) + in.log_cover;
  return std::min(1.0, std::exp(exponent));
}

double LandscapeGrid::coordinate(std::size_t i) const {
  const auto last = static_cast<double>(grid_n - 1);
  return span * (2.0 * static_cast<double>(i) - last) / last;
}

LandscapeGrid landscape_slice(const Model& model, const Dataset& data, std::size_t grid_n,
                              double span, std::uint64_t seed) {
  if (grid_n < 3 || grid_n % 2 == 0) Fail(ErrorKind::kData, "grid_n must be odd and >= 3");
  if (!(span > 0.0)) Fail(ErrorKind::kData, "span must be > 0");

  Rng rng(DeriveSeed(seed, StreamTag::kDirections));
  std::normal_distribution<double> normal;
  auto direction = [&] {
    Model d = model;
    for (std::size_t l = 0; l < d.num_layers(); ++l) {
      for (double& x : d.weights[l].entries()) x = normal(rng);
      const double dn = frobenius_norm(d.weights[l]);
      const double target = frobenius_norm(model.weights[l]);
      if (dn > 0.0) {
        for (double& x : d.weights[l].entries()) x *= target / dn;
      }
      std::fill(d.biases[l].begin(), d.biases[l].end(), 0.0);
    }
    return flatten_parameters(d);
  };
  const std::vector<double> d1 = direction();
  const std::vector<double> d2 = direction();
  const std::vector<double> theta = flatten_parameters(model);

  LandscapeGrid grid;
  grid.grid_n = grid_n;
  grid.span = span;
  grid.losses.resize(grid_n * grid_n);
  std::vector<double> p(theta.size());
  for (std::size_t ix = 0; ix < grid_n; ++ix) {
    const double a = grid.coordinate(ix);
    for (std::size_t iy = 0; iy < grid_n; ++iy) {
      const double b = grid.coordinate(iy);
      for (std::size_t t = 0; t < p.size(); ++t) p[t] = theta[t] + a * d1[t] + b * d2[t];
      const Model shifted = unflatten_parameters(model, p);
      grid.losses[ix * grid_n + iy] =
          loss_ce(predict_proba(shifted, data.features), data.labels);
    }
  }
  return grid;
}

}  // namespace ahsc
