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

#ifndef AHSC_METRICS_H_
#define AHSC_METRICS_H_

#include <span>
#include <string_view>
#include <vector>

#include "ahsc/linalg.h"

namespace ahsc {

struct ScoredPredictions {
  // One row of class probabilities per sample.
  Matrix probs;
  std::vector<int> labels;
};

enum class Metric { kAccuracy, kAuc };

// "acc" or "auc"; throws kData otherwise.
Metric ParseMetric(std::string_view name);
std::string_view ToString(Metric metric);

// Row argmax, ties to the lowest class index.
std::size_t argmax_row(std::span<const double> row);

// Throws kData on empty input.
double accuracy(const Matrix& probs, std::span<const int> labels);
double accuracy(const ScoredPredictions& preds);

// Mann-Whitney statistic P(s+ > s-) + P(s+ == s-)/2 computed from mid-ranks.
// Throws kDegenerate unless both classes are present.
double auc_binary(std::span<const double> scores, std::span<const int> labels);

// Unweighted one-vs-rest mean. Throws kDegenerate when k < 2 or a class has
// no samples.
double auc_macro(const Matrix& probs, std::span<const int> labels);
double auc_macro(const ScoredPredictions& preds);

double score(Metric metric, const Matrix& probs, std::span<const int> labels);

// 100 * (1 - (optimum - observed) / (optimum - random_baseline)).
double normalized_score(double observed, double optimum, double random_baseline);

double generalization_gap(double train_score, double test_score);

// Mid-ranks (1-based), ties share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of mid-ranks. NaN when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace ahsc

#endif  // AHSC_METRICS_H_
