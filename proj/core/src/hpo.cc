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

#include "ahsc/hpo.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

#include <json.hpp>

#include "ahsc/error.h"
#include "ahsc/nn.h"
#include "ahsc/random.h"

namespace ahsc {

namespace {

using Clock = std::chrono::steady_clock;

double MillisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Runs fn(i) for i in [0, count). Each index owns its output slot, so the
// result is the same for any thread count. The first exception by index wins.
void ParallelFor(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(count));
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int SampleLog2(Rng& rng, int lo, int hi) {
  std::uniform_real_distribution<double> u(std::log2(lo), std::log2(hi));
  const auto v = static_cast<int>(std::lround(std::exp2(u(rng))));
  return std::clamp(v, lo, hi);
}

struct FullRun {
  Model model;
  double score = 0.0;
  std::size_t epochs = 0;
};

FullRun RunFull(Model start, const HyperConfig& h, const TrainValidation& data,
                std::size_t epochs, Metric metric, bool early_stop, std::uint64_t seed) {
  TrainResult trained = train(std::move(start), data.train, h, epochs, early_stop, seed);
  const Matrix probs = predict_proba(trained.model, data.validation.features);
  const double s = score(metric, probs, data.validation.labels);
  return {std::move(trained.model), s, trained.history.epochs_run()};
}

// models[i] belongs to records[i] (empty when not fully trained).
void PickBest(SearchResult& result, std::vector<Model>& models) {
  bool found = false;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    if (!r.full_score) continue;
    // Records are in config_id order, so strict > keeps the lowest id on ties.
    if (!found || *r.full_score > result.best_score) {
      result.best = r.config;
      result.best_score = *r.full_score;
      result.best_model = std::move(models[i]);
      found = true;
    }
  }
}

nlohmann::ordered_json Hyperparams(const HyperConfig& h) {
  nlohmann::ordered_json j;
  j["depth"] = h.depth;
  j["width"] = h.width;
  j["batch_size"] = h.batch_size;
  j["learning_rate"] = h.learning_rate;
  return j;
}

}  // namespace

std::vector<std::size_t> HyperConfig::LayerDims(std::size_t num_features, int num_classes) const {
  std::vector<std::size_t> dims{num_features};
  for (int d = 0; d < depth; ++d) dims.push_back(static_cast<std::size_t>(width));
  dims.push_back(static_cast<std::size_t>(num_classes));
  return dims;
}

void HyperSpace::Validate() const {
  if (depth_min < 1 || depth_min > depth_max) Fail(ErrorKind::kData, "bad depth range");
  if (width_min < 1 || width_min > width_max) Fail(ErrorKind::kData, "bad width range");
  if (batch_min < 1 || batch_min > batch_max) Fail(ErrorKind::kData, "bad batch size range");
  if (!(lr_min > 0.0) || !(lr_min <= lr_max)) Fail(ErrorKind::kData, "bad learning rate range");
}

bool HyperSpace::Contains(const HyperConfig& h) const {
  return h.depth >= depth_min && h.depth <= depth_max && h.width >= width_min &&
         h.width <= width_max && h.batch_size >= batch_min && h.batch_size <= batch_max &&
         h.learning_rate >= lr_min && h.learning_rate <= lr_max;
}

std::vector<HyperConfig> sample_configs(const HyperSpace& space, std::size_t n,
                                        std::uint64_t seed) {
  space.Validate();
  Rng rng(DeriveSeed(seed, StreamTag::kSampling));
  std::uniform_int_distribution<int> depth(space.depth_min, space.depth_max);
  std::uniform_real_distribution<double> log_lr(std::log10(space.lr_min),
                                                 std::log10(space.lr_max));
  std::vector<HyperConfig> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    HyperConfig h;
    h.config_id = static_cast<int>(i);
    h.depth = depth(rng);
    h.width = SampleLog2(rng, space.width_min, space.width_max);
    h.batch_size = SampleLog2(rng, space.batch_min, space.batch_max);
    h.learning_rate = std::clamp(std::pow(10.0, log_lr(rng)), space.lr_min, space.lr_max);
    out.push_back(h);
  }
  return out;
}

std::vector<int> lowest_k(const std::map<int, double>& scores, std::size_t k) {
  std::vector<std::pair<double, int>> order;
  order.reserve(scores.size());
  for (const auto& [id, s] : scores) order.emplace_back(s, id);
  std::sort(order.begin(), order.end());
  std::vector<int> ids;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) ids.push_back(order[i].second);
  return ids;
}

std::uint64_t ConfigSeed(std::uint64_t master_seed, int config_id) {
  return MixSeed(master_seed, static_cast<std::uint64_t>(config_id));
}

SearchResult ahsc(const HyperSpace& space, const TrainValidation& data, std::size_t n1,
                  std::size_t n2, std::uint64_t seed, std::size_t epochs_full, Metric metric,
                  const SearchOptions& options) {
  if (n2 < 1 || n1 < n2) {
    Fail(ErrorKind::kData, "need n1 >= n2 >= 1 (n1=" + std::to_string(n1) +
                               ", n2=" + std::to_string(n2) + ")");
  }
  data.train.Validate();
  data.validation.Validate();
  const auto start = Clock::now();
  const std::vector<HyperConfig> configs = sample_configs(space, n1, seed);

  SearchResult result;
  result.records.resize(n1);
  std::vector<Model> probe_models(options.continue_from_probe ? n1 : 0);

  ParallelFor(n1, options.threads, [&](std::size_t i) {
    const auto t0 = Clock::now();
    const HyperConfig& h = configs[i];
    const std::uint64_t cs = ConfigSeed(seed, h.config_id);
    const auto dims = h.LayerDims(data.train.num_features(), data.train.num_classes);
    TrainResult probe = train(init_model(dims, cs), data.train, h, 1, false, cs);
    ConvexityRecord rec = mu_max(probe.model, data.train, static_cast<std::size_t>(h.batch_size),
                                 options.denominator);
    rec.config_id = h.config_id;
    auto& out = result.records[i];
    out.config = h;
    out.convexity = std::move(rec);
    out.probe_epochs = probe.history.epochs_run();
    out.probe_ms = MillisSince(t0);
    if (options.continue_from_probe) probe_models[i] = std::move(probe.model);
  });

  std::map<int, double> survivors;
  for (const auto& r : result.records) {
    result.probe_epochs += r.probe_epochs;
    if (!r.convexity->discarded) survivors.emplace(r.config.config_id, r.convexity->mu_max);
  }
  if (survivors.empty()) {
    Fail(ErrorKind::kAllDiscarded,
         "all " + std::to_string(n1) + " probed configurations were discarded (mu_max <= 0)");
  }
  result.selected = lowest_k(survivors, n2);

  std::vector<Model> models(n1);
  ParallelFor(result.selected.size(), options.threads, [&](std::size_t s) {
    const auto idx = static_cast<std::size_t>(result.selected[s]);
    auto& rec = result.records[idx];
    const auto t0 = Clock::now();
    const HyperConfig& h = rec.config;
    const std::uint64_t cs = ConfigSeed(seed, h.config_id);
    Model start_model = options.continue_from_probe
                            ? std::move(probe_models[idx])
                            : init_model(h.LayerDims(data.train.num_features(),
                                                     data.train.num_classes),
                                         cs);
    FullRun run = RunFull(std::move(start_model), h, data, epochs_full, metric,
                          options.early_stop_on_fit, cs);
    rec.full_score = run.score;
    rec.full_epochs = run.epochs;
    rec.full_ms = MillisSince(t0);
    models[idx] = std::move(run.model);
  });
  for (const auto& r : result.records) result.full_epochs += r.full_epochs;
  PickBest(result, models);
  result.wall_ms = MillisSince(start);
  return result;
}

SearchResult random_search(const HyperSpace& space, const TrainValidation& data, std::size_t n,
                           std::uint64_t seed, std::size_t epochs_full, Metric metric,
                           const SearchOptions& options) {
  if (n < 1) Fail(ErrorKind::kData, "random search needs n >= 1");
  data.train.Validate();
  data.validation.Validate();
  const auto start = Clock::now();
  const std::vector<HyperConfig> configs = sample_configs(space, n, seed);

  SearchResult result;
  result.records.resize(n);
  std::vector<Model> models(n);
  ParallelFor(n, options.threads, [&](std::size_t i) {
    const auto t0 = Clock::now();
    const HyperConfig& h = configs[i];
    const std::uint64_t cs = ConfigSeed(seed, h.config_id);
    Model start_model =
        init_model(h.LayerDims(data.train.num_features(), data.train.num_classes), cs);
    FullRun run = RunFull(std::move(start_model), h, data, epochs_full, metric,
                          options.early_stop_on_fit, cs);
    auto& out = result.records[i];
    out.config = h;
    out.full_score = run.score;
    out.full_epochs = run.epochs;
    out.full_ms = MillisSince(t0);
    models[i] = std::move(run.model);
  });
  for (const auto& r : result.records) {
    result.selected.push_back(r.config.config_id);
    result.full_epochs += r.full_epochs;
  }
  PickBest(result, models);
  result.wall_ms = MillisSince(start);
  return result;
}

std::vector<std::string> ToJsonLines(const SearchResult& result, bool include_timing) {
  std::vector<std::string> lines;
  for (const auto& r : result.records) {
    if (!r.convexity) continue;
    nlohmann::ordered_json j;
    j["phase"] = "probe";
    j["config_id"] = r.config.config_id;
    j["hyperparams"] = Hyperparams(r.config);
    j["mu_max"] = r.convexity->mu_max;
    j["discarded"] = r.convexity->discarded;
    j["epochs"] = r.probe_epochs;
    if (include_timing) j["wall_ms"] = r.probe_ms;
    lines.push_back(j.dump());
  }
  for (int id : result.selected) {
    const auto& r = result.records[static_cast<std::size_t>(id)];
    nlohmann::ordered_json j;
    j["phase"] = "full";
    j["config_id"] = r.config.config_id;
    j["hyperparams"] = Hyperparams(r.config);
    j["score"] = *r.full_score;
    j["epochs"] = r.full_epochs;
    if (include_timing) j["wall_ms"] = r.full_ms;
    lines.push_back(j.dump());
  }
  return lines;
}

std::string SummaryJsonLine(const SearchResult& result, Metric metric, bool include_timing) {
  nlohmann::ordered_json j;
  j["phase"] = "summary";
  nlohmann::ordered_json best;
  best["config_id"] = result.best.config_id;
  best["hyperparams"] = Hyperparams(result.best);
  best["score"] = result.best_score;
  best["metric"] = std::string(ToString(metric));
  j["best"] = std::move(best);
  nlohmann::ordered_json budget;
  budget["probe_epochs"] = result.probe_epochs;
  budget["full_epochs"] = result.full_epochs;
  budget["total_epochs"] = result.total_epochs();
  budget["full_runs"] = result.selected.size();
  if (include_timing) budget["wall_ms"] = result.wall_ms;
  j["budget"] = std::move(budget);
  return j.dump();
}

}  // namespace ahsc
