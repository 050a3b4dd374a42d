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

// Hyper-parameter search driven by the strong-convexity proxy.
//
// ahsc() probes n1 sampled configurations for one epoch each, scores every
// probe by mu_max, drops configurations whose mu_max is zero, and fully
// trains only the n2 with the lowest mu_max. random_search() is the baseline
// that fully trains everything it samples.
//
// Every configuration gets its own seed, MixSeed(master_seed, config_id), so
// results do not depend on evaluation order or thread count.

#ifndef AHSC_HPO_H_
#define AHSC_HPO_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ahsc/convexity.h"
#include "ahsc/data.h"
#include "ahsc/hyper.h"
#include "ahsc/metrics.h"
#include "ahsc/nn.h"

namespace ahsc {

// n independent draws with config_id 0..n-1 from one stream keyed by seed.
std::vector<HyperConfig> sample_configs(const HyperSpace& space, std::size_t n,
                                        std::uint64_t seed);

// Ids of the k smallest scores, ordered by (score, id).
std::vector<int> lowest_k(const std::map<int, double>& scores, std::size_t k);

std::uint64_t ConfigSeed(std::uint64_t master_seed, int config_id);

struct TrainValidation {
  Dataset train;
  Dataset validation;
};

struct SearchOptions {
  bool early_stop_on_fit = true;
  ProxyDenominator denominator = ProxyDenominator::kFullMatrix;
  // Continue the full run from the probe weights (fresh optimizer state)
  // instead of restarting from the seed-derived initialization.
  bool continue_from_probe = false;
  unsigned threads = 1;
};

struct SearchRecord {
  HyperConfig config;
  // Absent for random search, which never probes.
  std::optional<ConvexityRecord> convexity;
  // Validation score of the full run; absent when the config was not selected.
  std::optional<double> full_score;
  std::size_t probe_epochs = 0;
  std::size_t full_epochs = 0;
  double probe_ms = 0.0;
  double full_ms = 0.0;

  std::size_t epochs_used() const { return probe_epochs + full_epochs; }
};

struct SearchResult {
  std::vector<SearchRecord> records;
  // Configurations that received a full run, in the order they were chosen.
  std::vector<int> selected;
  HyperConfig best;
  double best_score = 0.0;
  // Weights of the winning full run.
  Model best_model;
  std::size_t probe_epochs = 0;
  std::size_t full_epochs = 0;
  double wall_ms = 0.0;

  std::size_t total_epochs() const { return probe_epochs + full_epochs; }
};

// Throws kData on n1 < n2, n2 < 1, or an invalid space, and kAllDiscarded
// (naming n1) when every probe has mu_max <= 0.
SearchResult ahsc(const HyperSpace& space, const TrainValidation& data, std::size_t n1,
                  std::size_t n2, std::uint64_t seed, std::size_t epochs_full, Metric metric,
                  const SearchOptions& options = {});

SearchResult random_search(const HyperSpace& space, const TrainValidation& data, std::size_t n,
                           std::uint64_t seed, std::size_t epochs_full, Metric metric,
                           const SearchOptions& options = {});

// JSON-lines log of a search: one "probe" line per probed config (config_id
// order), then one "full" line per full run (selection order):
//   {phase, config_id, hyperparams, mu_max, discarded, epochs[, wall_ms]}
//   {phase, config_id, hyperparams, score, epochs[, wall_ms]}
// The epochs fields sum to total_epochs(). wall_ms is only written when
// include_timing is set so logs stay byte-identical across runs.
std::vector<std::string> ToJsonLines(const SearchResult& result, bool include_timing);

// {"phase":"summary","best":{...},"budget":{...}}
std::string SummaryJsonLine(const SearchResult& result, Metric metric, bool include_timing);

}  // namespace ahsc

#endif  // AHSC_HPO_H_
