// Copyright 2026 The xms Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "xms_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(XMS_CLI_PATH) + " " + args + " > " + (workdir() / "stdout.txt").string() +
                          " 2> " + (workdir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

const fs::path& dataset() {
  static const fs::path dir = [] {
    const auto d = workdir() / "data";
    EXPECT_EQ(run("synth --out " + d.string() + " --n 60 --da 16 --db 12 --seed 4"), 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST(Cli, FitThenEval) {
  const auto model = workdir() / "cca.xmsm";
  ASSERT_EQ(run("fit --dataset " + dataset().string() + " --method cca --dim 3 --out " + model.string()), 0)
      << slurp(workdir() / "stderr.txt");
  EXPECT_TRUE(fs::exists(model));
  const auto out = workdir() / "eval.json";
  ASSERT_EQ(run("eval --model " + model.string() + " --dataset " + dataset().string() +
                " --direction a2b --metrics map,cmc --out " + out.string()),
            0);
  const json j = read_json(out);
  EXPECT_GE(j["a2b"]["map"].get<double>(), 0.0);
  EXPECT_EQ(j["a2b"]["cmc"].size(), 60u);
  EXPECT_FALSE(j.contains("b2a"));
}

TEST(Cli, BenchFromYamlThenTtest) {
  const auto cfg = workdir() / "bench.yaml";
  std::ofstream(cfg) << "dataset: data\nrepetitions: 3\nmethods:\n  - cca\n  - method: gmlda\n    params:\n"
                        "      dim: 2\nttest_baseline: cca\n";
  const auto report = workdir() / "report.json";
  const auto csv = workdir() / "report.csv";
  dataset();
  ASSERT_EQ(run("bench --config " + cfg.string() + " --out " + report.string() + " --csv " + csv.string()), 0)
      << slurp(workdir() / "stderr.txt");
  const json j = read_json(report);
  for (const char* key : {"config", "methods", "ttests", "box_stats", "environment"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["methods"]["GMLDA"]["directions"]["a2b"]["map_runs"].size(), 3u);
  EXPECT_EQ(j["ttests"].size(), 3u);
  EXPECT_NE(slurp(csv).find("a2b_mean"), std::string::npos);

  const auto tt = workdir() / "tt.json";
  ASSERT_EQ(run("ttest --report " + report.string() + " --baseline GMLDA --out " + tt.string()), 0);
  EXPECT_EQ(read_json(tt).size(), 3u);
  EXPECT_EQ(run("ttest --report " + report.string() + " --baseline jfssl"), 2);
}

TEST(Cli, SweepWritesSurface) {
  const auto cfg = workdir() / "sweep.json";
  std::ofstream(cfg) << json{{"dataset", dataset().string()}, {"repetitions", 1}, {"methods", {"jfssl"}}}.dump();
  const auto out = workdir() / "surface.json";
  ASSERT_EQ(run("sweep --config " + cfg.string() + " --method jfssl --grid 0.01,1 --grid2 0,0.1,1 --out " +
                out.string()),
            0)
      << slurp(workdir() / "stderr.txt");
  const json j = read_json(out);
  EXPECT_EQ(j["surface"]["b2a"].size(), 2u);
  EXPECT_EQ(j["surface"]["b2a"][0].size(), 3u);
  EXPECT_EQ(run("sweep --config " + cfg.string() + " --method cca --out " + out.string()), 2);
  EXPECT_EQ(run("sweep --config " + cfg.string() + " --method jfssl --grid 1,x --out " + out.string()), 2);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--version"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("fit --dataset " + dataset().string()), 2);
  EXPECT_EQ(run("fit --dataset " + dataset().string() + " --method svm --out x.xmsm"), 2);
  EXPECT_EQ(run("fit --dataset " + (workdir() / "nowhere").string() + " --method cca --out x.xmsm"), 3);

  // Mismatched pair counts are a data error with a descriptive message.
  const auto bad = workdir() / "bad";
  fs::create_directories(bad);
  std::ofstream(bad / "features_a.csv") << "1,2\n3,4\n5,6\n";
  std::ofstream(bad / "features_b.csv") << "1\n2\n";
  std::ofstream(bad / "labels.csv") << "1\n2\n1\n";
  EXPECT_EQ(run("fit --dataset " + bad.string() + " --method cca --out x.xmsm"), 3);
  EXPECT_NE(slurp(workdir() / "stderr.txt").find("pair count mismatch"), std::string::npos);

  const auto cfg = workdir() / "bad.yaml";
  std::ofstream(cfg) << "dataset: data\nmethods: [cca]\nbogus: 1\n";
  EXPECT_EQ(run("bench --config " + cfg.string() + " --out r.json"), 2);

  // Unregularized LCFS without PCA on wide data is singular: a numerical failure.
  EXPECT_EQ(run("fit --dataset " + dataset().string() +
                " --method lcfs --no-pca --lambda1 0 --lambda2 0 --n-train 10 --out x.xmsm"),
            4);
}
