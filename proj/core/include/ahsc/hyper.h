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

#ifndef AHSC_HYPER_H_
#define AHSC_HYPER_H_

#include <cstddef>
#include <vector>

namespace ahsc {

struct HyperConfig {
  int config_id = 0;
  // Number of hidden layers, all of size `width`.
  int depth = 1;
  int width = 16;
  int batch_size = 32;
  double learning_rate = 1e-3;

  // [n, width x depth, k]
  std::vector<std::size_t> LayerDims(std::size_t num_features, int num_classes) const;

  friend bool operator==(const HyperConfig&, const HyperConfig&) = default;
};

// Inclusive ranges. width and batch_size are sampled log2-uniformly,
// learning_rate log10-uniformly, depth uniformly.
struct HyperSpace {
  int depth_min = 1;
  int depth_max = 4;
  int width_min = 16;
  int width_max = 1024;
  int batch_min = 4;
  int batch_max = 256;
  double lr_min = 1e-5;
  double lr_max = 1.0;

  // Throws kData when a range is inverted or a log-sampled bound is <= 0.
  void Validate() const;
  bool Contains(const HyperConfig& h) const;
};

}  // namespace ahsc

#endif  // AHSC_HYPER_H_
