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

#include "cli.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ahsc/convexity.h"
#include "ahsc/data.h"
#include "ahsc/error.h"
#include "ahsc/hpo.h"
#include "ahsc/metrics.h"
#include "ahsc/random.h"
#include "ahsc/theory.h"

namespace ahsc::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sink for JSON lines: a file when a path is given, `out` otherwise.
class LineSink {
 public:
  LineSink(const std::string& path, std::ostream& out) : to_file_(!path.empty()) {
    if (to_file_) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) Fail(ErrorKind::kData, "cannot open output file '" + path + "'");
    }
    stream_ = to_file_ ? static_cast<std::ostream*>(&file_) : &out;
  }

  void Write(const std::string& line) { *stream_ << line << '\n'; }
  bool to_file() const { return to_file_; }

 private:
  bool to_file_;
  std::ofstream file_;
  std::ostream* stream_;
};

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

json Hyperparams(const HyperConfig& h) {
  json j;
  j["depth"] = h.depth;
  j["width"] = h.width;
  j["batch_size"] = h.batch_size;
  j["learning_rate"] = h.learning_rate;
  return j;
}

// --data / --synthetic plus preprocessing flags.
struct SourceArgs {
  std::string data;
  std::string synthetic;
  std::string label_column;
  bool no_standardize = false;

  void Register(CLI::App* app) {
    auto* d = app->add_option("--data", data, "CSV dataset (last column is the label)");
    auto* s = app->add_option("--synthetic", synthetic,
                              "blobs:m=100,k=3,dim=4,sep=3,noise=1,seed=1");
    d->excludes(s);
    app->add_option("--label-column", label_column, "label column name (default: last)");
    app->add_flag("--no-standardize", no_standardize, "skip train-fitted standardization");
  }

  Dataset Load() const {
    if (data.empty() == synthetic.empty()) {
      throw UsageError("exactly one of --data or --synthetic is required");
    }
    if (!data.empty()) return load_csv(data, label_column);
    return synthetic_blobs(parse_blob_spec(synthetic));
  }
};

struct Splits {
  Dataset fit;
  Dataset validation;
  // Empty unless an extra untouched test split was requested.
  std::optional<Dataset> test;
};

// Stratified holdout split of the provided data, optionally after carving out
// a separate test split first. The scaler is fit on the training rows only.
Splits PrepareSplits(const Dataset& data, std::uint64_t seed, double test_frac, double val_frac,
                     bool standardize_features, std::ostream& err) {
  Splits s;
  Dataset pool = data;
  if (test_frac > 0.0) {
    SplitResult outer = split(data, test_frac, MixSeed(seed, 1));
    for (const auto& w : outer.warnings) err << "warning: " << w << '\n';
    pool = std::move(outer.train);
    s.test = std::move(outer.test);
  }
  SplitResult inner = split(pool, val_frac, seed);
  for (const auto& w : inner.warnings) err << "warning: " << w << '\n';
  s.fit = std::move(inner.train);
  s.validation = std::move(inner.test);
  if (standardize_features) {
    const Scaler scaler = Scaler::Fit(s.fit);
    s.fit = scaler.Apply(s.fit);
    s.validation = scaler.Apply(s.validation);
    if (s.test) s.test = scaler.Apply(*s.test);
  }
  return s;
}

Dataset MaybeStandardize(const Dataset& data, bool standardize_features) {
  if (!standardize_features) return data;
  return Scaler::Fit(data, "full").Apply(data);
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kAllDiscarded:
      return kExitAllDiscarded;
    case ErrorKind::kNumeric:
    case ErrorKind::kSize:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

// ---------------------------------------------------------------------------
// search / random-search

struct SearchArgs {
  SourceArgs source;
  std::size_t n1 = 50;
  std::size_t n2 = 10;
  std::uint64_t seed = 0;
  std::size_t epochs = 50;
  std::string metric = "acc";
  std::string out;
  bool col_norm = false;
  bool timing = false;
  bool no_early_stop = false;
  bool continue_from_probe = false;
  unsigned threads = 1;
  double test_frac = 0.0;
  double val_frac = 0.2;
  int max_depth = 4;
  int max_width = 1024;
};

void RegisterSearch(CLI::App* app, SearchArgs& a, bool random) {
  a.source.Register(app);
  if (random) {
    app->add_option("--n,--n1", a.n1, "configurations to sample and fully train")
        ->check(CLI::PositiveNumber);
  } else {
    app->add_option("--n1", a.n1, "configurations to probe")->check(CLI::PositiveNumber);
    app->add_option("--n2", a.n2, "configurations to fully train")->check(CLI::PositiveNumber);
    app->add_flag("--continue-from-probe", a.continue_from_probe,
                  "start full runs from the probe weights");
  }
  app->add_option("--seed", a.seed, "master seed")->required();
  app->add_option("--epochs", a.epochs, "epoch cap for full runs")->check(CLI::PositiveNumber);
  app->add_option("--metric", a.metric, "validation metric")->check(CLI::IsMember({"acc", "auc"}));
  app->add_option("--out", a.out, "JSON-lines log path (default: stdout)");
  app->add_flag("--col-norm", a.col_norm, "per-class row norm in the proxy denominator");
  app->add_flag("--timing", a.timing, "add wall_ms fields to the log");
  app->add_flag("--no-early-stop", a.no_early_stop, "train full runs for every epoch");
  app->add_option("--threads", a.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--val-frac", a.val_frac, "holdout fraction used to score full runs")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--test-frac", a.test_frac, "extra untouched test fraction (default: none)")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--max-depth", a.max_depth, "largest hidden-layer count")
      ->check(CLI::PositiveNumber);
  app->add_option("--max-width", a.max_width, "largest hidden width")->check(CLI::PositiveNumber);
}

HyperSpace SpaceFrom(int max_depth, int max_width) {
  HyperSpace space;
  space.depth_max = max_depth;
  space.width_max = max_width;
  space.depth_min = std::min(space.depth_min, max_depth);
  space.width_min = std::min(space.width_min, max_width);
  return space;
}

int RunSearch(const SearchArgs& a, bool random, std::ostream& out, std::ostream& err) {
  if (!random && a.n1 < a.n2) throw UsageError("--n1 must be >= --n2");
  const Metric metric = ParseMetric(a.metric);
  const Dataset data = a.source.Load();
  Splits s = PrepareSplits(data, a.seed, a.test_frac, a.val_frac, !a.source.no_standardize, err);
  const HyperSpace space = SpaceFrom(a.max_depth, a.max_width);

  SearchOptions options;
  options.early_stop_on_fit = !a.no_early_stop;
  options.denominator = a.col_norm ? ProxyDenominator::kPerClassRow : ProxyDenominator::kFullMatrix;
  options.continue_from_probe = a.continue_from_probe;
  options.threads = a.threads;

  const TrainValidation tv{s.fit, s.validation};
  const SearchResult result = random ? random_search(space, tv, a.n1, a.seed, a.epochs, metric, options)
                                     : ahsc(space, tv, a.n1, a.n2, a.seed, a.epochs, metric, options);

  LineSink sink(a.out, out);
  for (const auto& line : ToJsonLines(result, a.timing)) sink.Write(line);

  json summary = json::parse(SummaryJsonLine(result, metric, a.timing));
  auto evaluate = [&](const Dataset& d) {
    const Matrix probs = predict_proba(result.best_model, d.features);
    json j;
    j["accuracy"] = accuracy(probs, d.labels);
    if (metric != Metric::kAccuracy) {
      j[std::string(ToString(metric))] = score(metric, probs, d.labels);
    }
    j["samples"] = d.num_samples();
    return j;
  };
  summary["holdout"] = evaluate(s.validation);
  if (s.test) summary["test"] = evaluate(*s.test);
  const std::string line = summary.dump();
  sink.Write(line);
  if (sink.to_file()) out << line << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// oracle-validate

struct OracleArgs {
  SourceArgs source;
  std::size_t n = 20;
  std::uint64_t seed = 0;
  double oracle_eps = kDefaultHessianEps;
  std::optional<int> max_width;
  int max_depth = 4;
  std::size_t max_pool = 0;
  bool col_norm = false;
  std::string out;
  double test_frac = 0.2;
};

int RunOracleValidate(const OracleArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.oracle_eps > 0.0)) throw UsageError("--oracle-eps must be > 0");
  const Dataset data = a.source.Load();
  SplitResult sr = split(data, a.test_frac, a.seed);
  for (const auto& w : sr.warnings) err << "warning: " << w << '\n';
  const Dataset train_set = MaybeStandardize(sr.train, !a.source.no_standardize);

  const int k = train_set.num_classes;
  const int width_cap = a.max_width.value_or(
      std::max(1, static_cast<int>(kOracleParamLimit) / std::max(k, 1)));
  const HyperSpace space = SpaceFrom(a.max_depth, width_cap);
  const std::size_t pool = a.max_pool > 0 ? a.max_pool : 10 * a.n;
  const std::vector<HyperConfig> configs = sample_configs(space, pool, a.seed);
  const ProxyDenominator denom =
      a.col_norm ? ProxyDenominator::kPerClassRow : ProxyDenominator::kFullMatrix;

  LineSink sink(a.out, out);
  std::vector<double> proxies;
  std::vector<double> oracles;
  std::size_t discarded = 0;
  for (const auto& h : configs) {
    if (proxies.size() == a.n) break;
    const std::size_t head = static_cast<std::size_t>(h.width) * static_cast<std::size_t>(k);
    if (head > kOracleParamLimit) {
      Fail(ErrorKind::kSize, "oracle needs width * classes <= " +
                                 std::to_string(kOracleParamLimit) + "; width " +
                                 std::to_string(h.width) + " gives " + std::to_string(head));
    }
    const std::uint64_t cs = ConfigSeed(a.seed, h.config_id);
    const auto dims = h.LayerDims(train_set.num_features(), k);
    const TrainResult probe = train(init_model(dims, cs), train_set, h, 1, false, cs);
    const ConvexityRecord rec =
        mu_max(probe.model, train_set, static_cast<std::size_t>(h.batch_size), denom);
    if (rec.discarded) {
      ++discarded;
      continue;
    }
    double oracle = 0.0;
    for (const auto& idx : batches(train_set, static_cast<std::size_t>(h.batch_size))) {
      oracle = std::max(oracle, last_layer_hessian_norm(probe.model, gather(train_set, idx),
                                                        a.oracle_eps));
    }
    if (!std::isfinite(rec.mu_max) || !std::isfinite(oracle)) {
      Fail(ErrorKind::kNumeric, "non-finite proxy or oracle for config " +
                                    std::to_string(h.config_id));
    }
    proxies.push_back(rec.mu_max);
    oracles.push_back(oracle);
    json j;
    j["phase"] = "pair";
    j["config_id"] = h.config_id;
    j["hyperparams"] = Hyperparams(h);
    j["proxy"] = rec.mu_max;
    j["oracle"] = oracle;
    sink.Write(j.dump());
  }
  if (proxies.size() < a.n) {
    err << "warning: only " << proxies.size() << " of " << a.n
        << " requested configurations survived out of " << pool << " sampled\n";
  }
  json summary;
  summary["phase"] = "summary";
  summary["pairs"] = proxies.size();
  summary["discarded"] = discarded;
  summary["oracle_eps"] = a.oracle_eps;
  const double rho = proxies.size() >= 2 ? spearman(proxies, oracles) : std::nan("");
  const double self = proxies.size() >= 2 ? spearman(proxies, proxies) : std::nan("");
  // NaN (constant columns or too few pairs) is written as null.
  summary["spearman"] = std::isfinite(rho) ? json(rho) : json(nullptr);
  summary["self_check"] = std::isfinite(self) ? json(self) : json(nullptr);
  const std::string line = summary.dump();
  sink.Write(line);
  if (sink.to_file()) out << line << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train / landscape

struct TrainArgs {
  SourceArgs source;
  std::uint64_t seed = 0;
  HyperConfig hp;
  std::size_t epochs = 20;
  bool no_early_stop = false;
  std::string checkpoint;
};

void RegisterModelFlags(CLI::App* app, TrainArgs& a) {
  app->add_option("--depth", a.hp.depth, "hidden layers")->check(CLI::PositiveNumber);
  app->add_option("--width", a.hp.width, "hidden width")->check(CLI::PositiveNumber);
  app->add_option("--batch-size", a.hp.batch_size, "mini-batch size")->check(CLI::PositiveNumber);
  app->add_option("--lr", a.hp.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
  app->add_option("--epochs", a.epochs, "epoch cap")->check(CLI::PositiveNumber);
  app->add_flag("--no-early-stop", a.no_early_stop, "train for every epoch");
}

TrainResult TrainInline(const TrainArgs& a, const Dataset& data) {
  const auto dims = a.hp.LayerDims(data.num_features(), data.num_classes);
  return train(init_model(dims, a.seed), data, a.hp, a.epochs, !a.no_early_stop, a.seed);
}

int RunTrain(const TrainArgs& a, std::ostream& out) {
  const Dataset data = MaybeStandardize(a.source.Load(), !a.source.no_standardize);
  const TrainResult r = TrainInline(a, data);
  SaveCheckpoint({a.hp, r.model}, a.checkpoint);
  json j;
  j["checkpoint"] = a.checkpoint;
  j["hyperparams"] = Hyperparams(a.hp);
  j["epochs"] = r.history.epochs_run();
  j["loss"] = r.history.loss.back();
  j["accuracy"] = r.history.accuracy.back();
  j["stopped_early"] = r.history.stopped_early;
  out << j.dump() << '\n';
  return kExitOk;
}

struct LandscapeArgs {
  TrainArgs train;
  std::string checkpoint;
  std::size_t grid_n = 21;
  double span = 1.0;
  std::string out;
  std::string sidecar;
  double sharpness_eps = 1e-3;
  bool col_norm = false;
};

int RunLandscape(const LandscapeArgs& a, std::ostream& out) {
  const Dataset data = MaybeStandardize(a.train.source.Load(), !a.train.source.no_standardize);
  Checkpoint ckpt;
  if (!a.checkpoint.empty()) {
    ckpt = LoadCheckpoint(a.checkpoint);
    if (ckpt.model.num_inputs() != data.num_features() ||
        ckpt.model.num_classes() != static_cast<std::size_t>(data.num_classes)) {
      Fail(ErrorKind::kData, "checkpoint shape does not match the dataset");
    }
  } else {
    ckpt = {a.train.hp, TrainInline(a.train, data).model};
  }

  const LandscapeGrid grid = landscape_slice(ckpt.model, data, a.grid_n, a.span, a.train.seed);
  {
    std::ofstream csv(a.out, std::ios::binary | std::ios::trunc);
    if (!csv) Fail(ErrorKind::kData, "cannot open output file '" + a.out + "'");
    csv << "x_index,y_index,loss\n";
    for (std::size_t ix = 0; ix < grid.grid_n; ++ix) {
      for (std::size_t iy = 0; iy < grid.grid_n; ++iy) {
        csv << ix << ',' << iy << ',' << FormatDouble(grid.at(ix, iy)) << '\n';
      }
    }
    if (!csv) Fail(ErrorKind::kData, "failed writing '" + a.out + "'");
  }

  const ProxyDenominator denom =
      a.col_norm ? ProxyDenominator::kPerClassRow : ProxyDenominator::kFullMatrix;
  const ConvexityRecord rec =
      mu_max(ckpt.model, data, static_cast<std::size_t>(ckpt.hyperparams.batch_size), denom);
  SharpnessParams sp;
  sp.epsilon = a.sharpness_eps;
  sp.seed = a.train.seed;
  const double zeta = model_sharpness(ckpt.model, whole(data), sp);

  json j;
  j["grid_csv"] = a.out;
  j["grid_n"] = grid.grid_n;
  j["span"] = grid.span;
  j["seed"] = a.train.seed;
  j["center_loss"] = grid.at(grid.grid_n / 2, grid.grid_n / 2);
  j["mu_max"] = rec.mu_max;
  j["discarded"] = rec.discarded;
  j["sharpness"] = zeta;
  j["sharpness_epsilon"] = sp.epsilon;
  j["num_parameters"] = ckpt.model.num_parameters();
  j["hyperparams"] = Hyperparams(ckpt.hyperparams);
  const std::string sidecar = a.sidecar.empty() ? a.out + ".json" : a.sidecar;
  std::ofstream side(sidecar, std::ios::binary | std::ios::trunc);
  if (!side) Fail(ErrorKind::kData, "cannot open output file '" + sidecar + "'");
  side << j.dump() << '\n';
  out << j.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bound / verify-theory / synth

int RunBound(const CoveringBoundInput& in, std::ostream& out) {
  json j;
  j["m"] = in.m;
  j["t"] = in.t;
  j["beta"] = in.beta;
  j["log_cover"] = in.log_cover;
  j["bound"] = covering_bound(in);
  out << j.dump() << '\n';
  return kExitOk;
}

struct TheoryArgs {
  std::vector<std::string> problems;
  std::uint64_t seed = 0;
  SuiteOptions options;
  std::string out;
};

int RunVerifyTheory(const TheoryArgs& a, std::ostream& out) {
  std::vector<QuadraticProblem> problems;
  if (a.problems.empty()) {
    problems.push_back(IsotropicProblem(4, 1.0));
    const double diag[] = {1.0, 4.0};
    problems.push_back(DiagonalProblem(diag));
    problems.push_back(RandomPsdProblem(8, a.seed));
  }
  for (const auto& text : a.problems) {
    try {
      problems.push_back(ParseProblem(text));
    } catch (const Error& e) {
      throw UsageError("--h " + text + ": " + e.what());
    }
  }
  const auto reports = run_theory_suite(problems, a.seed, a.options);
  LineSink sink(a.out, out);
  bool all_pass = true;
  for (const auto& r : reports) {
    sink.Write(ToJsonLine(r));
    all_pass = all_pass && r.pass;
  }
  return all_pass ? kExitOk : kExitCheckFailed;
}

int RunSynth(const BlobSpec& spec, const std::string& path, std::ostream& out) {
  write_csv(synthetic_blobs(spec), path);
  json j;
  j["out"] = path;
  j["samples"] = spec.m_per_class * static_cast<std::size_t>(spec.k);
  out << j.dump() << '\n';
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyper-parameter search ranked by a strong-convexity proxy"};
  app.require_subcommand(1);
  std::function<int()> action;

  SearchArgs search_args;
  auto* search = app.add_subcommand("search", "probe, rank by mu_max, fully train the lowest");
  RegisterSearch(search, search_args, false);
  search->callback([&] { action = [&] { return RunSearch(search_args, false, out, err); }; });

  SearchArgs random_args;
  auto* random = app.add_subcommand("random-search", "fully train every sampled configuration");
  RegisterSearch(random, random_args, true);
  random->callback([&] { action = [&] { return RunSearch(random_args, true, out, err); }; });

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle-validate", "proxy vs finite-difference Hessian norm");
  oracle_args.source.Register(oracle);
  oracle->add_option("--n", oracle_args.n, "non-discarded configurations to compare")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--seed", oracle_args.seed, "master seed")->required();
  oracle->add_option("--oracle-eps", oracle_args.oracle_eps, "finite-difference step");
  oracle->add_option("--max-width", oracle_args.max_width,
                     "largest hidden width (default: oracle limit / classes)")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--max-depth", oracle_args.max_depth, "largest hidden-layer count")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--max-pool", oracle_args.max_pool,
                     "configurations sampled at most (default: 10 * n)");
  oracle->add_flag("--col-norm", oracle_args.col_norm, "per-class row norm in the proxy");
  oracle->add_option("--out", oracle_args.out, "JSON-lines output (default: stdout)");
  oracle->add_option("--test-frac", oracle_args.test_frac, "held-out fraction")
      ->check(CLI::Range(0.0, 1.0));
  oracle->callback([&] { action = [&] { return RunOracleValidate(oracle_args, out, err); }; });

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train one model and save a checkpoint");
  train_args.source.Register(train_cmd);
  train_cmd->add_option("--seed", train_args.seed, "seed")->required();
  RegisterModelFlags(train_cmd, train_args);
  train_cmd->add_option("--out", train_args.checkpoint, "checkpoint path")->required();
  train_cmd->callback([&] { action = [&] { return RunTrain(train_args, out); }; });

  LandscapeArgs land_args;
  auto* land = app.add_subcommand("landscape", "2-D loss slice as CSV plus a metrics sidecar");
  land_args.train.source.Register(land);
  land->add_option("--seed", land_args.train.seed, "seed for training and directions")
      ->required();
  RegisterModelFlags(land, land_args.train);
  land->add_option("--checkpoint", land_args.checkpoint, "model from `train` (else train inline)");
  land->add_option("--grid-n", land_args.grid_n, "odd grid size");
  land->add_option("--span", land_args.span, "half-width of the slice");
  land->add_option("--out", land_args.out, "grid CSV path")->required();
  land->add_option("--sidecar", land_args.sidecar, "metrics JSON path (default: OUT.json)");
  land->add_option("--sharpness-eps", land_args.sharpness_eps, "sharpness ball radius")
      ->check(CLI::PositiveNumber);
  land->add_flag("--col-norm", land_args.col_norm, "per-class row norm in the proxy");
  land->callback([&] { action = [&] { return RunLandscape(land_args, out); }; });

  CoveringBoundInput bound_args;
  auto* bound = app.add_subcommand("bound", "uniform-deviation covering bound");
  bound->add_option("--m", bound_args.m, "sample count")->required();
  bound->add_option("--t", bound_args.t, "deviation")->required();
  bound->add_option("--beta", bound_args.beta, "smoothness constant")->required();
  bound->add_option("--log-cover", bound_args.log_cover, "log covering number");
  bound->callback([&] { action = [&] { return RunBound(bound_args, out); }; });

  TheoryArgs theory_args;
  auto* theory = app.add_subcommand("verify-theory", "inequality checks on quadratics");
  // --h names the Hessian here, so help is long-form only.
  theory->set_help_flag("--help", "print this help message and exit");
  theory->add_option("--h", theory_args.problems, "diag:1,4 | iso:DIM:MU | rows:a,b;c,d");
  theory->add_option("--seed", theory_args.seed, "probe seed");
  theory->add_option("--points", theory_args.options.points, "random probes per check");
  theory->add_option("--gd-steps", theory_args.options.gd_steps, "gradient descent steps");
  theory->add_flag("--strict-decay", theory_args.options.decay_on_all,
                   "run the epoch-benefit check on every problem");
  theory->add_option("--out", theory_args.out, "JSON-lines output (default: stdout)");
  theory->callback([&] { action = [&] { return RunVerifyTheory(theory_args, out); }; });

  BlobSpec blob;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a Gaussian-blob dataset as CSV");
  synth->add_option("--m-per-class", blob.m_per_class, "samples per class");
  synth->add_option("--k", blob.k, "classes")->check(CLI::PositiveNumber);
  synth->add_option("--dim", blob.dim, "features")->check(CLI::PositiveNumber);
  synth->add_option("--sep", blob.separation, "centre distance from the origin");
  synth->add_option("--noise", blob.noise_std, "noise standard deviation");
  synth->add_option("--seed", blob.seed, "seed")->required();
  synth->add_option("--out", synth_out, "CSV path")->required();
  synth->callback([&] { action = [&] { return RunSynth(blob, synth_out, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << ToString(e.kind()) << "): " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path) {
  ckpt.model.Validate();
  json j;
  j["format"] = "ahsc-model-v1";
  j["hyperparams"] = Hyperparams(ckpt.hyperparams);
  j["layer_dims"] = ckpt.model.layer_dims;
  json weights = json::array();
  for (const auto& w : ckpt.model.weights) {
    weights.push_back(std::vector<double>(w.entries().begin(), w.entries().end()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = ckpt.model.biases;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) Fail(ErrorKind::kData, "cannot open checkpoint '" + path + "' for writing");
  f << j.dump() << '\n';
  if (!f) Fail(ErrorKind::kData, "failed writing checkpoint '" + path + "'");
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) Fail(ErrorKind::kData, "cannot open checkpoint '" + path + "'");
  Checkpoint c;
  try {
    const json j = json::parse(f);
    if (j.at("format") != "ahsc-model-v1") Fail(ErrorKind::kData, "unknown checkpoint format");
    const json& h = j.at("hyperparams");
    c.hyperparams.depth = h.at("depth").get<int>();
    c.hyperparams.width = h.at("width").get<int>();
    c.hyperparams.batch_size = h.at("batch_size").get<int>();
    c.hyperparams.learning_rate = h.at("learning_rate").get<double>();
    c.model.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    const auto& dims = c.model.layer_dims;
    const auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
    c.model.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    if (dims.size() < 2 || weights.size() != dims.size() - 1) {
      Fail(ErrorKind::kData, "checkpoint layer count mismatch");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      c.model.weights.emplace_back(dims[l + 1], dims[l], weights[l]);
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kData, "malformed checkpoint '" + path + "': " + e.what());
  } catch (const Error& e) {
    Fail(ErrorKind::kData, "malformed checkpoint '" + path + "': " + e.what());
  }
  c.model.Validate();
  if (c.hyperparams.batch_size < 1) Fail(ErrorKind::kData, "checkpoint batch_size must be >= 1");
  return c;
}

}  // namespace ahsc::cli
