// Copyright 2026 The REED Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <json.hpp>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "reed/checkpoint.hpp"
#include "reed/image_io.hpp"
#include "test_support.hpp"

namespace reed {
namespace {

namespace fs = std::filesystem;
using testing::read_file;
using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<nlohmann::json> read_jsonl(const fs::path& p) {
  std::vector<nlohmann::json> out;
  std::istringstream in(read_file(p));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

std::vector<int> runlog_ks(const fs::path& p) {
  std::vector<int> ks;
  for (const auto& j : read_jsonl(p))
    if (j["type"] == "epoch") ks.push_back(j["k"].get<int>());
  return ks;
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

// One 64-image dataset and one pretrained checkpoint shared by the suite.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new TempDir("cli");
    ASSERT_EQ(run({"gen-data", "--count", "64", "--size", "32", "--seed", "7", "--out", data()}).code, 0);
    const Result r = run({"pretrain", "--data", data(), "--out", (root_->path() / "pre").string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete root_;
    root_ = nullptr;
  }
  static std::string data() { return (root_->path() / "data").string(); }
  static std::string pretrained() { return (root_->path() / "pre" / "model.ckpt").string(); }
  static TempDir* root_;
};
TempDir* Cli::root_ = nullptr;

TEST_F(Cli, GenDataWritesDeterministicPngs) {
  EXPECT_EQ(count_files(data(), ".png"), 64u);
  TempDir again("gen");
  ASSERT_EQ(run({"gen-data", "--count", "64", "--size", "32", "--seed", "7", "--out", again.path().string()}).code, 0);
  for (const auto& e : fs::directory_iterator(data()))
    EXPECT_EQ(read_file(e.path()), read_file(again.path() / e.path().filename())) << e.path();
}

TEST_F(Cli, UsageErrorsExitTwo) {
  const Result missing = run({"gen-data", "--count", "4"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("--out"), std::string::npos);
  EXPECT_NE(missing.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"eval", "--checkpoint", pretrained(), "--out", "x", "--bogus"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, BadConfigKeyExitsTwoNamingKey) {
  TempDir out("badkey");
  const Result r = run({"pretrain", "--data", data(), "--set", "train.epohcs=2", "--out", out.path().string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("train.epohcs"), std::string::npos) << r.err;
}

TEST_F(Cli, RuntimeFailureExitsOne) {
  TempDir out("runtime");
  const Result r = run({"eval", "--checkpoint", (out.path() / "none.ckpt").string(), "--data", data(), "--out",
                        out.path().string()});
  EXPECT_EQ(r.code, 1);
}

TEST_F(Cli, PretrainOutputsAndIdempotence) {
  const fs::path pre = root_->path() / "pre";
  for (const char* f : {"model.ckpt", "runlog.jsonl", "config.txt", "manifest.json"}) EXPECT_TRUE(fs::exists(pre / f)) << f;
  TempDir again("pre2");
  const Result r = run({"pretrain", "--data", data(), "--out", again.path().string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("final val loss"), std::string::npos);
  EXPECT_EQ(read_file(pre / "model.ckpt"), read_file(again / "model.ckpt"));
  EXPECT_EQ(read_file(pre / "runlog.jsonl"), read_file(again / "runlog.jsonl"));
  EXPECT_EQ(read_file(pre / "config.txt"), read_file(again / "config.txt"));
}

TEST_F(Cli, TrainModesShapeTheSchedule) {
  TempDir out("train");
  const std::string epochs = "train.epochs=3";
  ASSERT_EQ(run({"train", "--init", pretrained(), "--data", data(), "--set", epochs, "--out",
                 (out.path() / "di").string()})
                .code,
            0);
  const auto di = runlog_ks(out.path() / "di" / "runlog.jsonl");
  ASSERT_FALSE(di.empty());
  EXPECT_EQ(di.front(), 4);

  ASSERT_EQ(run({"train", "--init", pretrained(), "--data", data(), "--mode", "it", "--k", "2", "--set", epochs,
                 "--out", (out.path() / "it").string()})
                .code,
            0);
  EXPECT_EQ(runlog_ks(out.path() / "it" / "runlog.jsonl"), (std::vector<int>{2, 2, 2}));

  ASSERT_EQ(run({"train", "--init", pretrained(), "--data", data(), "--mode", "vanilla", "--set", epochs, "--out",
                 (out.path() / "vanilla").string()})
                .code,
            0);
  EXPECT_EQ(runlog_ks(out.path() / "vanilla" / "runlog.jsonl"), (std::vector<int>{1, 1, 1}));

  // Frozen encoder: the trained checkpoint keeps the pretrained encoder bytes.
  const auto init = load_checkpoint(pretrained()).model;
  const auto trained = load_checkpoint(out.path() / "di" / "model.ckpt").model;
  for (std::size_t i = 0; i < init.encoder.size(); ++i) EXPECT_EQ(init.encoder[i].value, trained.encoder[i].value);

  EXPECT_EQ(run({"train", "--init", pretrained(), "--mode", "turbo", "--out", out.path().string()}).code, 2);
}

TEST_F(Cli, EvalReportsAreDeterministicAndLabeled) {
  TempDir out("eval");
  const auto a = (out.path() / "a").string(), b = (out.path() / "b").string(), s = (out.path() / "s").string();
  ASSERT_EQ(run({"eval", "--checkpoint", pretrained(), "--data", data(), "--latent-mode", "mean", "--out", a}).code, 0);
  ASSERT_EQ(run({"eval", "--checkpoint", pretrained(), "--data", data(), "--latent-mode", "mean", "--out", b}).code, 0);
  EXPECT_EQ(read_file(fs::path(a) / "report.csv"), read_file(fs::path(b) / "report.csv"));
  EXPECT_EQ(read_file(fs::path(a) / "report.json"), read_file(fs::path(b) / "report.json"));

  std::istringstream csv(read_file(fs::path(a) / "report.csv"));
  std::set<int> checkpoints;
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    checkpoints.insert(std::stoi(line.substr(c1 + 1, c2 - c1 - 1)));
  }
  EXPECT_EQ(checkpoints, (std::set<int>{5, 15, 25}));
  EXPECT_TRUE(fs::exists(fs::path(a) / "plots" / "metric_mse.png"));

  ASSERT_EQ(run({"eval", "--checkpoint", pretrained(), "--data", data(), "--smooth", "gaussian:0.8", "--out", s}).code,
            0);
  const auto j = nlohmann::json::parse(read_file(fs::path(s) / "report.json"));
  EXPECT_EQ(j["smoothing"], "gaussian:0.8");
}

TEST_F(Cli, AblateWritesGridWithFlags) {
  TempDir out("ablate");
  const Result r = run({"ablate", "--init", pretrained(), "--data", data(), "--set", "train.epochs=1", "--out",
                        out.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(read_file(out / "ablation.csv"));
  std::set<std::string> variants;
  std::string line;
  std::getline(csv, line);
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    variants.insert(line.substr(0, line.find(',')));
    ++rows;
  }
  EXPECT_EQ(variants.size(), 5u);
  EXPECT_EQ(rows, 75u);
  const std::string cmp = read_file(out / "comparison.csv");
  EXPECT_NE(cmp.find(",best,"), std::string::npos);
  EXPECT_NE(cmp.find(",1,"), std::string::npos);  // some variant is best somewhere
  for (const char* v : {"vanilla", "IT_k2", "IT_k5", "IT_FSL_k5", "IT_FSL_DI"})
    EXPECT_TRUE(fs::exists(out.path() / "variants" / v / "runlog.jsonl")) << v;
}

TEST_F(Cli, SpectraForImagesAndIterates) {
  TempDir out("spectra");
  const auto img_out = out.path() / "img", it_out = out.path() / "it";
  ASSERT_EQ(run({"spectra", "--images", data(), "--limit", "3", "--out", img_out.string()}).code, 0);
  std::istringstream bands(read_file(img_out / "bands.csv"));
  std::string line;
  std::getline(bands, line);
  EXPECT_EQ(line, "image,iteration,band,energy,hf_retention");
  std::size_t rows = 0;
  while (std::getline(bands, line)) ++rows;
  EXPECT_EQ(rows, 3u * 8);
  EXPECT_EQ(count_files(img_out, ".png"), 3u);

  ASSERT_EQ(run({"spectra", "--checkpoint", pretrained(), "--data", data(), "--iterations", "20", "--limit", "2",
                 "--out", it_out.string()})
                .code,
            0);
  EXPECT_EQ(count_files(it_out, ".png"), 4u);
  for (const auto& e : fs::directory_iterator(it_out))
    if (e.path().extension() == ".png") EXPECT_EQ(read_png(e.path()).width(), 32);
  EXPECT_EQ(run({"spectra", "--out", it_out.string()}).code, 2);
}

TEST_F(Cli, SeedPrecedenceFlagOverEnvironment) {
  TempDir out("seed");
  ::setenv("REED_SEED", "5", 1);
  ASSERT_EQ(run({"pretrain", "--data", data(), "--set", "pretrain.epochs=1", "--out", (out.path() / "env").string()})
                .code,
            0);
  ASSERT_EQ(run({"pretrain", "--data", data(), "--seed", "6", "--set", "pretrain.epochs=1", "--out",
                 (out.path() / "flag").string()})
                .code,
            0);
  ::unsetenv("REED_SEED");
  EXPECT_EQ(nlohmann::json::parse(read_file(out.path() / "env" / "manifest.json"))["seed"], 5);
  EXPECT_EQ(nlohmann::json::parse(read_file(out.path() / "flag" / "manifest.json"))["seed"], 6);
}

}  // namespace
}  // namespace reed
