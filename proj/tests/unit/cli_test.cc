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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

namespace ahsc::cli {
namespace {

using nlohmann::json;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ahsc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Outcome o;
  o.code = Run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::vector<json> Lines(const std::string& text) {
  std::vector<json> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(json::parse(line));
  }
  return lines;
}

std::string Scratch(const std::string& name) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / "ahsc_cli_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

const std::vector<std::string> kSmall = {"--synthetic", "blobs:m=30,k=3,dim=4,seed=4",
                                         "--max-width", "32", "--max-depth", "2"};

std::vector<std::string> With(std::vector<std::string> head) {
  head.insert(head.end(), kSmall.begin(), kSmall.end());
  return head;
}

TEST(CliUsage, Errors) {
  EXPECT_EQ(Invoke(With({"search", "--n1", "4", "--n2", "2"})).code, kExitUsage);
  EXPECT_EQ(Invoke(With({"search", "--n1", "4", "--n2", "0", "--seed", "1"})).code, kExitUsage);
  EXPECT_EQ(Invoke(With({"search", "--n1", "2", "--n2", "3", "--seed", "1"})).code, kExitUsage);
  EXPECT_EQ(Invoke({"search", "--n1", "2", "--n2", "1", "--seed", "1"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"nonsense"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"verify-theory", "--h", "diag:1,x"}).code, kExitUsage);
}

TEST(CliUsage, MissingFileIsDataError) {
  const Outcome o = Invoke({"search", "--data", "/nonexistent/x.csv", "--n1", "2", "--n2", "1",
                            "--seed", "1"});
  EXPECT_EQ(o.code, kExitData);
  EXPECT_NE(o.err.find("x.csv"), std::string::npos);
  // Well-formed flags with values outside the input invariants.
  EXPECT_EQ(Invoke({"bound", "--m", "0", "--t", "1", "--beta", "1"}).code, kExitData);
}

TEST(CliSearch, RecordCountsAndDeterminism) {
  const auto args = With({"search", "--n1", "20", "--n2", "5", "--seed", "3", "--epochs", "4"});
  const Outcome a = Invoke(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  const auto lines = Lines(a.out);
  std::size_t probe = 0, full = 0, summary = 0, epochs = 0;
  for (const auto& j : lines) {
    const std::string phase = j["phase"];
    probe += phase == "probe";
    full += phase == "full";
    summary += phase == "summary";
    if (phase != "summary") epochs += j["epochs"].get<std::size_t>();
  }
  EXPECT_EQ(probe, 20u);
  EXPECT_LE(full, 5u);
  EXPECT_GE(full, 1u);
  EXPECT_EQ(summary, 1u);
  const json& s = lines.back();
  EXPECT_EQ(s["budget"]["total_epochs"].get<std::size_t>(), epochs);
  EXPECT_EQ(s["budget"]["probe_epochs"], 20);
  EXPECT_TRUE(s.contains("holdout"));
  EXPECT_EQ(Invoke(args).out, a.out);
}

TEST(CliSearch, RandomSearchBudget) {
  const Outcome o = Invoke(With({"random-search", "--n", "4", "--seed", "2", "--epochs", "3",
                                 "--no-early-stop"}));
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const auto lines = Lines(o.out);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines.back()["budget"]["total_epochs"], 12);
  EXPECT_EQ(lines.back()["budget"]["probe_epochs"], 0);
}

TEST(CliSearch, OutFileAndTiming) {
  const std::string path = Scratch("search.jsonl");
  const Outcome o = Invoke(With({"search", "--n1", "3", "--n2", "1", "--seed", "5", "--epochs",
                                 "2", "--timing", "--out", path}));
  ASSERT_EQ(o.code, kExitOk) << o.err;
  // stdout carries only the summary.
  ASSERT_EQ(Lines(o.out).size(), 1u);
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  for (const auto& j : Lines(text.str())) {
    if (j["phase"] == "summary") {
      EXPECT_TRUE(j["budget"].contains("wall_ms"));
    } else {
      EXPECT_TRUE(j.contains("wall_ms"));
    }
  }
}

TEST(CliBound, Examples) {
  auto value = [](std::vector<std::string> args) {
    const Outcome o = Invoke(args);
    EXPECT_EQ(o.code, kExitOk) << o.err;
    return Lines(o.out).at(0)["bound"].get<double>();
  };
  EXPECT_DOUBLE_EQ(value({"bound", "--m", "1", "--t", "0", "--beta", "1"}), 1.0);
  EXPECT_DOUBLE_EQ(value({"bound", "--m", "18", "--t", "1", "--beta", "1", "--log-cover", "1"}), 1.0);
  EXPECT_NEAR(value({"bound", "--m", "180", "--t", "1", "--beta", "1", "--log-cover", "1"}),
              std::exp(-9.0), 1e-8 * std::exp(-9.0));
}

TEST(CliTheory, DefaultSuiteAndProblems) {
  const Outcome d = Invoke({"verify-theory"});
  EXPECT_EQ(d.code, kExitOk) << d.out;
  for (const auto& j : Lines(d.out)) EXPECT_TRUE(j["pass"].get<bool>()) << j.dump();
  const Outcome diag = Invoke({"verify-theory", "--h", "diag:1,4"});
  EXPECT_EQ(diag.code, kExitOk);
  EXPECT_EQ(Lines(diag.out).size(), 5u);
  const Outcome strict = Invoke({"verify-theory", "--h", "diag:1,4", "--strict-decay"});
  EXPECT_EQ(strict.code, kExitCheckFailed);
}

TEST(CliLandscape, GridAndSidecar) {
  const std::string ckpt = Scratch("model.json");
  const std::string csv = Scratch("grid.csv");
  const auto train = Invoke({"train", "--synthetic", "blobs:m=20,k=2,dim=3,seed=1", "--seed",
                             "9", "--width", "8", "--epochs", "3", "--out", ckpt});
  ASSERT_EQ(train.code, kExitOk) << train.err;
  const double train_loss = Lines(train.out).at(0)["loss"];
  const auto land = Invoke({"landscape", "--synthetic", "blobs:m=20,k=2,dim=3,seed=1", "--seed",
                            "9", "--checkpoint", ckpt, "--grid-n", "5", "--out", csv});
  ASSERT_EQ(land.code, kExitOk) << land.err;
  std::ifstream in(csv);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  ASSERT_EQ(rows.size(), 26u);
  EXPECT_EQ(rows[0], "x_index,y_index,loss");
  std::ifstream side(csv + ".json");
  const json s = json::parse(side);
  EXPECT_DOUBLE_EQ(s["center_loss"].get<double>(), train_loss);
  EXPECT_GE(s["sharpness"].get<double>(), 0.0);
  EXPECT_EQ(s["grid_n"], 5);
  // Even grids are rejected.
  EXPECT_NE(Invoke({"landscape", "--synthetic", "blobs:m=20,k=2,dim=3,seed=1", "--seed", "9",
                    "--checkpoint", ckpt, "--grid-n", "4", "--out", csv})
                .code,
            kExitOk);
}

TEST(CliCheckpoint, RoundTrip) {
  const std::string path = Scratch("rt.json");
  Checkpoint c;
  c.hyperparams.width = 3;
  c.hyperparams.learning_rate = 0.1234567890123;
  c.model.layer_dims = {2, 3, 2};
  c.model.weights = {Matrix(3, 2), Matrix(2, 3)};
  c.model.weights[0](1, 1) = -0.1;
  c.model.weights[1](0, 2) = 1.0 / 3.0;
  c.model.biases = {{0.1, 0.2, 0.3}, {1e-300, -2.5}};
  SaveCheckpoint(c, path);
  const Checkpoint back = LoadCheckpoint(path);
  EXPECT_EQ(back.hyperparams, c.hyperparams);
  EXPECT_EQ(back.model, c.model);
  std::ofstream(path) << "{\"format\":\"other\"}";
  EXPECT_THROW(LoadCheckpoint(path), std::exception);
}

TEST(CliOracle, PairsAreFinite) {
  const Outcome o = Invoke(With({"oracle-validate", "--n", "3", "--seed", "1"}));
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const auto lines = Lines(o.out);
  ASSERT_EQ(lines.size(), 4u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(lines[i]["phase"], "pair");
    EXPECT_TRUE(std::isfinite(lines[i]["proxy"].get<double>()));
    EXPECT_TRUE(std::isfinite(lines[i]["oracle"].get<double>()));
    EXPECT_GT(lines[i]["proxy"].get<double>(), 0.0);
  }
  EXPECT_EQ(lines[3]["pairs"], 3);
  EXPECT_DOUBLE_EQ(lines[3]["self_check"].get<double>(), 1.0);
}

TEST(CliOracle, OversizedHessianIsSizeError) {
  const Outcome o = Invoke({"oracle-validate", "--synthetic", "blobs:m=20,k=3,dim=4,seed=1",
                            "--n", "20", "--seed", "1", "--max-width", "1024"});
  EXPECT_EQ(o.code, kExitNumeric);
  EXPECT_NE(o.err.find("width"), std::string::npos) << o.err;
}

TEST(CliSynth, WritesLoadableCsv) {
  const std::string path = Scratch("blobs.csv");
  const Outcome o = Invoke({"synth", "--m-per-class", "5", "--k", "2", "--dim", "3", "--seed",
                            "1", "--out", path});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_EQ(Lines(o.out).at(0)["samples"], 10);
  const Outcome s = Invoke({"search", "--data", path, "--n1", "2", "--n2", "1", "--seed", "1",
                            "--epochs", "2", "--max-width", "16"});
  EXPECT_EQ(s.code, kExitOk) << s.err;
}

}  // namespace
}  // namespace ahsc::cli
