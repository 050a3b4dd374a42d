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

#include "ahsc/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ahsc/error.h"

namespace ahsc {

namespace {

void CheckCounts(const Matrix& probs, std::span<const int> labels) {
  if (probs.rows() != labels.size()) {
    Fail(ErrorKind::kShape, std::to_string(probs.rows()) + " prediction rows for " +
                                std::to_string(labels.size()) + " labels");
  }
}

}  // namespace

Metric ParseMetric(std::string_view name) {
  if (name == "acc") return Metric::kAccuracy;
  if (name == "auc") return Metric::kAuc;
  Fail(ErrorKind::kData, "unknown metric '" + std::string(name) + "' (want acc or auc)");
}

std::string_view ToString(Metric metric) {
  return metric == Metric::kAccuracy ? "acc" : "auc";
}

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

double accuracy(const Matrix& probs, std::span<const int> labels) {
  CheckCounts(probs, labels);
  if (labels.empty()) Fail(ErrorKind::kData, "accuracy of an empty prediction set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (static_cast<int>(argmax_row(probs.row(i))) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double accuracy(const ScoredPredictions& preds) { return accuracy(preds.probs, preds.labels); }

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share the mean of ranks i+1..j+1.
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

double auc_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    Fail(ErrorKind::kShape, "auc: score and label counts differ");
  }
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (int y : labels) {
    if (y == 1) {
      ++pos;
    } else if (y == 0) {
      ++neg;
    } else {
      Fail(ErrorKind::kLabel, "auc_binary labels must be 0 or 1, got " + std::to_string(y));
    }
  }
  if (pos == 0 || neg == 0) {
    Fail(ErrorKind::kDegenerate, "auc needs both classes present (pos=" + std::to_string(pos) +
                                     ", neg=" + std::to_string(neg) + ")");
  }
  const std::vector<double> ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) rank_sum += ranks[i];
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

double auc_macro(const Matrix& probs, std::span<const int> labels) {
  CheckCounts(probs, labels);
  const std::size_t k = probs.cols();
  if (k < 2) Fail(ErrorKind::kDegenerate, "auc needs at least two classes");
  double total = 0.0;
  std::vector<double> scores(labels.size());
  std::vector<int> one_vs_rest(labels.size());
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      scores[i] = probs(i, c);
      one_vs_rest[i] = labels[i] == static_cast<int>(c) ? 1 : 0;
    }
    if (std::find(one_vs_rest.begin(), one_vs_rest.end(), 1) == one_vs_rest.end()) {
      Fail(ErrorKind::kDegenerate, "class " + std::to_string(c) + " missing from auc input");
    }
    total += auc_binary(scores, one_vs_rest);
  }
  return total / static_cast<double>(k);
}

double auc_macro(const ScoredPredictions& preds) { return auc_macro(preds.probs, preds.labels); }

double score(Metric metric, const Matrix& probs, std::span<const int> labels) {
  return metric == Metric::kAccuracy ? accuracy(probs, labels) : auc_macro(probs, labels);
}

double normalized_score(double observed, double optimum, double random_baseline) {
  const double gap = optimum - random_baseline;
  if (gap == 0.0) Fail(ErrorKind::kDegenerate, "optimum equals random baseline");
  return 100.0 * (1.0 - (optimum - observed) / gap);
}

double generalization_gap(double train_score, double test_score) {
  return train_score - test_score;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) Fail(ErrorKind::kShape, "spearman: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ahsc
