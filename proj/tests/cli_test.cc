// Copyright 2026 The Automaton-LM Authors.
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

// Drives the automaton_lm binary end to end. The binary path comes from the
// ALM_CLI environment variable set by ctest.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "alm/config.h"
#include "alm/error.h"
#include "alm/fixtures.h"
#include "alm/pipeline.h"
#include "json.hpp"

namespace alm {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void Spit(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

json BaseConfig() {
  return json::parse(R"({
    "paths": {"train": "train.txt", "valid": "valid.txt", "artifact_dir": "artifacts"},
    "encoder": {"dim": 16, "decay": 0.5, "window": 8, "seed": 1},
    "base_lm": {"order": 3, "alpha": 0.1},
    "datastore": {"precision": "fp32", "k_neigh": 16},
    "clustering": {"algo": "kmeans", "avg_cluster_size": 100, "seed": 2},
    "traversal": {"taus": [1, 2, "inf"], "max_knns": 16, "lambda": 0.25, "seed": 3},
    "eval": {"skip_fractions": [0, 0.5], "seed": 4}
  })");
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const char* bin = std::getenv("ALM_CLI");
    if (bin == nullptr) GTEST_SKIP() << "ALM_CLI not set";
    bin_ = bin;
    dir_ = fs::temp_directory_path() /
           ("alm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const FixtureText text = MakeRepetitiveFixture(3);
    Spit(dir_ / "train.txt", text.train);
    Spit(dir_ / "valid.txt", text.valid);
    WriteConfig(BaseConfig());
  }
  void TearDown() override {
    if (!dir_.empty()) fs::remove_all(dir_);
  }

  void WriteConfig(const json& cfg) { Spit(dir_ / "config.json", cfg.dump(2)); }

  Result Run(const std::string& args) {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = "'" + bin_ + "' " + args + " > '" + out.string() + "' 2> '" +
                            err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = Slurp(out);
    r.err = Slurp(err);
    return r;
  }

  std::string Config() const { return "--config '" + (dir_ / "config.json").string() + "'"; }
  std::string Out(const std::string& name) const {
    return "--out '" + (dir_ / name).string() + "'";
  }

  std::string bin_;
  fs::path dir_;
};

TEST_F(Cli, BuildPrintsSizesAndIsIdempotent) {
  Result r = Run("build " + Config());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("k_clust="), std::string::npos);
  EXPECT_NE(r.out.find("avg_cluster_size="), std::string::npos);
  const RunConfig cfg = RunConfig::LoadFile((dir_ / "config.json").string());
  const fs::path art = ArtifactDir(cfg);
  const std::string ds = Slurp(art / kDatastoreFile);
  const std::string cl = Slurp(art / kClusteringFile);
  const std::string au = Slurp(art / kAutomatonFile);
  ASSERT_FALSE(ds.empty());
  r = Run("build " + Config());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Slurp(art / kDatastoreFile), ds);
  EXPECT_EQ(Slurp(art / kClusteringFile), cl);
  EXPECT_EQ(Slurp(art / kAutomatonFile), au);
}

TEST_F(Cli, MissingCorpusFieldIsNamed) {
  json cfg = BaseConfig();
  cfg["paths"].erase("train");
  WriteConfig(cfg);
  const Result r = Run("build " + Config());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("paths.train"), std::string::npos) << r.err;
}

TEST_F(Cli, MissingCorpusFileIsADataError) {
  json cfg = BaseConfig();
  cfg["paths"]["train"] = "nope.txt";
  WriteConfig(cfg);
  const Result r = Run("build " + Config());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("paths.train"), std::string::npos) << r.err;
}

TEST_F(Cli, SeedsAreMandatory) {
  json cfg = BaseConfig();
  cfg["traversal"].erase("seed");
  WriteConfig(cfg);
  const Result r = Run("build " + Config());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("traversal.seed"), std::string::npos) << r.err;
}

TEST_F(Cli, BadFlagsAreUsageErrors) {
  EXPECT_EQ(Run("").code, 1);
  EXPECT_EQ(Run("frobnicate " + Config()).code, 1);
  EXPECT_EQ(Run("eval " + Config() + " --tau 0").code, 1);
  EXPECT_EQ(Run("eval " + Config() + " --lambda 3").code, 1);
  EXPECT_EQ(Run("eval " + Config() + " --only bogus " + Out("o")).code, 1);
  EXPECT_EQ(Run("--help").code, 0);
}

TEST_F(Cli, EvalWritesCurveWithRowPerTauAndBaselines) {
  const Result r = Run("eval " + Config() + " " + Out("out"));
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream curve(Slurp(dir_ / "out" / "curve.csv"));
  std::string line;
  std::getline(curve, line);
  EXPECT_EQ(line, "system,tau,skip_fraction,foss,perplexity,tokens,searches");
  std::vector<std::string> systems;
  while (std::getline(curve, line)) systems.push_back(line.substr(0, line.find(',')));
  EXPECT_EQ(std::count(systems.begin(), systems.end(), "automaton"), 3);
  EXPECT_EQ(std::count(systems.begin(), systems.end(), "automaton_singleton"), 3);
  EXPECT_EQ(std::count(systems.begin(), systems.end(), "knnlm"), 2);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "histogram_tau_inf.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "overlap.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "effective_config.json"));
}

TEST_F(Cli, OnlyOverlap) {
  const Result r = Run("eval " + Config() + " --only overlap " + Out("ov"));
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir_ / "ov")) files.push_back(e.path().filename().string());
  std::sort(files.begin(), files.end());
  EXPECT_EQ(files, (std::vector<std::string>{"effective_config.json", "overlap.csv"}));
}

TEST_F(Cli, CorruptArtifactIsRejected) {
  ASSERT_EQ(Run("build " + Config()).code, 0);
  const RunConfig cfg = RunConfig::LoadFile((dir_ / "config.json").string());
  const fs::path ds = fs::path(ArtifactDir(cfg)) / kDatastoreFile;
  std::string bytes = Slurp(ds);
  bytes.replace(0, 4, "JUNK");
  Spit(ds, bytes);
  const Result r = Run("eval " + Config() + " " + Out("out"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unrecognized artifact header"), std::string::npos) << r.err;
}

TEST_F(Cli, SeedOverrideIsRecorded) {
  ASSERT_EQ(Run("sweep " + Config() + " --seed 42 " + Out("s")).code, 0);
  const json eff = json::parse(Slurp(dir_ / "s" / "effective_config.json"));
  EXPECT_EQ(eff["traversal"]["seed"], 42);
  EXPECT_EQ(eff["clustering"]["seed"], 42);
  EXPECT_EQ(eff["encoder"]["seed"], 42);
  EXPECT_EQ(eff["eval"]["seed"], 42);
}

TEST_F(Cli, Generate) {
  const std::string train = Slurp(dir_ / "train.txt");
  std::istringstream words(train);
  std::string w1, w2;
  words >> w1 >> w2;
  Result r = Run("generate " + Config() + " --tau 1 --prompt '" + w1 + " " + w2 + "' --length 5");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
  r = Run("generate " + Config() + " --prompt '" + w1 + "' --length 0");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  r = Run("generate " + Config() + " --prompt 'qqqq' --length 3");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Run("generate " + Config() + " --prompt x --mode greedy").code, 1);
}

TEST_F(Cli, Inspect) {
  ASSERT_EQ(Run("build " + Config() + " --cluster-algo singleton").code, 0);
  Result r = Run("inspect " + Config() + " --cluster-algo singleton --state 0");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("(1 members)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("-> 1"), std::string::npos) << r.out;
  r = Run("inspect " + Config() + " --entry 3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("pointer: 4"), std::string::npos) << r.out;
  EXPECT_EQ(Run("inspect " + Config() + " --state 99999999").code, 1);
  r = Run("inspect " + Config() + " --sample 5");
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t states = 0;
  for (std::size_t pos = 0; (pos = r.out.find("\nstate ", pos)) != std::string::npos; ++pos) ++states;
  if (r.out.rfind("state ", 0) == 0) ++states;
  EXPECT_EQ(states, 5u);
}

TEST(RunConfig, RejectsBadValues) {
  json cfg = BaseConfig();
  cfg["traversal"]["lambda"] = 1.5;
  EXPECT_THROW(RunConfig::FromJson(cfg), Error);
  cfg = BaseConfig();
  cfg["encoder"]["dim"] = "sixteen";
  try {
    RunConfig::FromJson(cfg);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("encoder.dim"), std::string::npos);
  }
  cfg = BaseConfig();
  cfg["clustering"]["algo"] = "spectral";
  EXPECT_THROW(RunConfig::FromJson(cfg), Error);
}

TEST(RunConfig, JsonRoundTrip) {
  const RunConfig cfg = RunConfig::FromJson(BaseConfig(), "/data");
  EXPECT_EQ(cfg.train_path, "/data/train.txt");
  const RunConfig back = RunConfig::FromJson(cfg.ToJson(), "/elsewhere");
  EXPECT_EQ(back.ToJson(), cfg.ToJson());
  EXPECT_EQ(cfg.ResolveKClust(3629), 36u);
}

}  // namespace
}  // namespace alm
