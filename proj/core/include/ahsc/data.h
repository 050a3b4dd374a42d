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

#ifndef AHSC_DATA_H_
#define AHSC_DATA_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ahsc/linalg.h"

namespace ahsc {

// m samples by n features, integer labels in [0, k).
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<std::string> feature_names;
  // Original label spelling per class id; empty when labels were numeric.
  std::vector<std::string> class_names;

  std::size_t num_samples() const { return labels.size(); }
  std::size_t num_features() const { return features.cols(); }

  // Throws kData if the invariants (m >= 1, finite features, labels in
  // range, matching row count) do not hold.
  void Validate() const;
};

// Materialized mini-batch: the rows of a Dataset picked by an index set.
struct Batch {
  Matrix features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

using IndexBatch = std::vector<std::size_t>;

// CSV contract: UTF-8, comma separated, header row, '.' decimal point, no
// quoting. `label_column` names the label column; empty selects the last one.
// Labels that are all non-negative integers are used as-is (k = max + 1);
// anything else is mapped to 0..k-1 in order of first appearance.
Dataset load_csv(const std::string& path, const std::string& label_column = "");

// Inverse of load_csv for numeric labels (or class_names when present).
void write_csv(const Dataset& data, const std::string& path);

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::string> warnings;
};

// Stratified split. Each class sends round(count * test_fraction) samples to
// the test side, at least one when count >= 2 and never all of them. A class
// with a single sample stays in train and produces a warning. Both sides keep
// the original row order.
SplitResult split(const Dataset& data, double test_fraction, std::uint64_t seed);

// Per-feature affine map fitted on one dataset. Applying it twice is not the
// same as applying it once; `fit_rows` and `source` record what it was fitted
// on so callers can tell.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::size_t fit_rows = 0;
  std::string source;

  static constexpr double kStdFloor = 1e-12;

  static Scaler Fit(const Dataset& data, std::string source = "train");
  Dataset Apply(const Dataset& data) const;
};

struct StandardizeResult {
  Dataset train;
  Dataset test;
  Scaler scaler;
};

StandardizeResult standardize(const Dataset& train, const Dataset& test);

// Partition of 0..m-1 into consecutive chunks of batch_size (last may be
// short). With a seed the indices are permuted first.
std::vector<IndexBatch> batches(std::size_t num_samples, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed = std::nullopt);
std::vector<IndexBatch> batches(const Dataset& data, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed = std::nullopt);

Batch gather(const Dataset& data, std::span<const std::size_t> indices);
Batch whole(const Dataset& data);
Dataset subset(const Dataset& data, std::span<const std::size_t> indices);

struct BlobSpec {
  std::size_t m_per_class = 100;
  int k = 3;
  std::size_t dim = 4;
  double separation = 3.0;
  double noise_std = 1.0;
  std::uint64_t seed = 1;
};

// Class c is centred at +-separation * e_(c mod dim); the sign flips on each
// pass through the basis so up to 2 * dim classes get distinct centres.
// Samples are interleaved by class (row i has label i mod k).
Dataset synthetic_blobs(const BlobSpec& spec);

// "blobs:m=100,k=3,dim=4,sep=3,noise=1,seed=1"; omitted keys keep defaults.
// Throws kData on malformed input.
BlobSpec parse_blob_spec(const std::string& text);

}  // namespace ahsc

#endif  // AHSC_DATA_H_
