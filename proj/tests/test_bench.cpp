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

#include <sstream>

#include "xms/bench.hpp"

using namespace xms;
using nlohmann::json;

namespace {

SyntheticSpec small_spec(Index n = 80) {
  SyntheticSpec s;
  s.n = n;
  s.da = 24;
  s.db = 20;
  s.seed = 3;
  return s;
}

BenchmarkConfig config_for(std::vector<std::string> methods, int reps) {
  json j = {{"synthetic", {{"n", 80}, {"da", 24}, {"db", 20}, {"seed", 3}}},
            {"methods", methods},
            {"repetitions", reps}};
  return parse_benchmark_config(j);
}

json strip_volatile(json j) {
  j.erase("environment");
  for (auto& [name, m] : j["methods"].items()) {
    m.erase("fit_seconds_runs");
    m.erase("fit_seconds_mean");
    m.erase("fit_seconds_var");
  }
  return j;
}

}  // namespace

TEST(Bench, SingleRepetitionSummaryCollapses) {
  BenchmarkConfig c = config_for({"cca"}, 1);
  c.n_train = 60;
  const auto data = make_synthetic(small_spec());
  const auto r = run_benchmark(c, data);
  ASSERT_EQ(r.n_test, 20);
  const auto& s = *r.methods.front().directions[0].summary;
  EXPECT_EQ(s.count, 1u);
  EXPECT_EQ(s.min, s.max);
  EXPECT_EQ(s.min, s.mean);
  EXPECT_EQ(s.var, 0.0);
}

TEST(Bench, DeterministicAcrossThreadCounts) {
  BenchmarkConfig c = config_for({"cca", "pls", "gmlda", "lcfs"}, 4);
  const auto data = make_synthetic(small_spec());
  c.threads = 1;
  const json one = strip_volatile(to_json(run_benchmark(c, data)));
  c.threads = 2;
  const json two = strip_volatile(to_json(run_benchmark(c, data)));
  EXPECT_EQ(one, two);
}

TEST(Bench, SummariesRecomputeFromRuns) {
  BenchmarkConfig c = config_for({"cca", "gmlda"}, 5);
  c.ttest_baseline = "cca";
  const auto r = run_benchmark(c, make_synthetic(small_spec()));
  const json j = to_json(r);
  for (const auto& [name, m] : j["methods"].items()) {
    for (const char* d : {"a2b", "b2a"}) {
      const auto runs = m["directions"][d]["map_runs"].get<std::vector<double>>();
      ASSERT_EQ(runs.size(), 5u);
      const auto s = summarize(runs);
      const auto& js = m["directions"][d]["summary"];
      EXPECT_DOUBLE_EQ(js["mean"].get<double>(), s.mean);
      EXPECT_DOUBLE_EQ(js["var"].get<double>(), s.var);
      EXPECT_DOUBLE_EQ(js["min"].get<double>(), s.min);
      EXPECT_DOUBLE_EQ(js["max"].get<double>(), s.max);
      for (double v : runs) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      const auto cmc = m["directions"][d]["cmc_mean"].get<std::vector<double>>();
      EXPECT_EQ(cmc.size(), static_cast<std::size_t>(r.n_test));
      EXPECT_NEAR(cmc.back(), 1.0, 1e-12);
    }
    EXPECT_EQ(m["fit_seconds_runs"].size(), 5u);
  }
  EXPECT_EQ(j["box_stats"].size(), 2u);
  ASSERT_EQ(r.ttests.size(), 3u);
  const auto gm = r.method("GMLDA");
  const auto base = r.method("CCA");
  const auto direct = students_t_test(detail::present(base.directions[0].runs), detail::present(gm.directions[0].runs));
  EXPECT_EQ(r.ttests[0].direction, "a2b");
  EXPECT_DOUBLE_EQ(r.ttests[0].result.p_value, direct.p_value);
  EXPECT_EQ(r.ttests[2].direction, "average");

  // A report read back from JSON reproduces the tests.
  const auto back = report_from_json(j);
  const auto again = compare_to_baseline(back, "CCA");
  ASSERT_EQ(again.size(), 3u);
  EXPECT_DOUBLE_EQ(again[1].result.p_value, r.ttests[1].result.p_value);
}

TEST(Bench, AccAtKModeUsesFirstK) {
  BenchmarkConfig c = config_for({"cca"}, 2);
  c.metric = MetricMode::acc_at_k;
  c.acc_ks = {5, 1};
  const auto r = run_benchmark(c, make_synthetic(small_spec()));
  const auto& d = r.methods.front().directions[1];
  EXPECT_DOUBLE_EQ(d.summary->mean, d.cmc_mean[4]);
  EXPECT_DOUBLE_EQ(d.acc_mean.at(1), d.cmc_mean[0]);
  const json j = to_json(r);
  EXPECT_TRUE(j["methods"]["CCA"]["directions"]["a2b"].contains("acc_runs"));
  c.acc_ks = {500};
  EXPECT_THROW(run_benchmark(c, make_synthetic(small_spec())), Error);
}

TEST(Bench, FailedFitsBecomeMissingCells) {
  json j = {{"synthetic", {{"n", 40}, {"da", 60}, {"db", 50}, {"seed", 3}}},
            {"methods", json::array({"cca", {{"method", "lcfs"}, {"params", {{"lambda1", 0}, {"lambda2", 0}}},
                                             {"preprocess", {{"pca", false}}}}})},
            {"repetitions", 3},
            {"ttest_baseline", "cca"}};
  const auto c = parse_benchmark_config(j);
  const auto r = run_benchmark(c);
  EXPECT_TRUE(r.incomplete);
  const auto& l = r.method("LCFS");
  EXPECT_EQ(l.missing.size(), 3u);
  EXPECT_FALSE(l.directions[0].summary.has_value());
  EXPECT_NE(l.missing[0].reason.find("singular"), std::string::npos);
  const json out = to_json(r);
  EXPECT_TRUE(out["methods"]["LCFS"]["directions"]["a2b"]["map_runs"][0].is_null());
  EXPECT_TRUE(out["methods"]["LCFS"]["fit_seconds_mean"].is_null());
  EXPECT_TRUE(r.ttests.empty());
  std::ostringstream csv;
  write_report_csv(csv, r);
  EXPECT_NE(csv.str().find("LCFS,,,,,,,,,,,,3"), std::string::npos) << csv.str();
}

TEST(Bench, CsvLayout) {
  const auto r = run_benchmark(config_for({"cca", "pls"}, 2), make_synthetic(small_spec()));
  std::ostringstream csv;
  write_report_csv(csv, r);
  std::istringstream lines(csv.str());
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header,
            "method,a2b_min,a2b_max,a2b_mean,a2b_var,a2b_std,b2a_min,b2a_max,b2a_mean,b2a_var,b2a_std,"
            "fit_seconds_mean,missing");
  std::getline(lines, row);
  EXPECT_EQ(row.rfind("CCA,", 0), 0u);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 12);
}

TEST(BenchConfig, RejectsBadInput) {
  auto expect_config_error = [](const json& j) {
    try {
      parse_benchmark_config(j);
      ADD_FAILURE() << j.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::config) << j.dump();
      EXPECT_EQ(e.exit_code(), 2);
    }
  };
  const json ok = {{"synthetic", json::object()}, {"methods", {"cca"}}};
  EXPECT_NO_THROW(parse_benchmark_config(ok));
  json j = ok;
  j["unknown"] = 1;
  expect_config_error(j);
  expect_config_error({{"methods", {"cca"}}});
  expect_config_error({{"synthetic", json::object()}, {"methods", {"svm"}}});
  expect_config_error({{"synthetic", json::object()}, {"methods", {"cca", "cca"}}});
  expect_config_error({{"synthetic", json::object()}, {"methods", json::array()}});
  expect_config_error({{"synthetic", json::object()}, {"methods", {"cca"}}, {"metric", "auc"}});
  expect_config_error({{"synthetic", json::object()}, {"methods", {"cca"}}, {"repetitions", 0}});
  expect_config_error({{"synthetic", json::object()}, {"methods", {"cca"}}, {"repetitions", "many"}});
  expect_config_error({{"synthetic", json::object()}, {"methods", {"cca"}}, {"ttest_baseline", "pls"}});
  expect_config_error({{"synthetic", json::object()}, {"methods", {{{"method", "cca"}, {"params", {{"dim", "x"}}}}}}});
}

TEST(BenchConfig, PerMetricParamsAndNames) {
  const json j = {{"synthetic", json::object()},
                  {"methods", {{{"method", "jfssl"},
                                {"name", "jfssl_tuned"},
                                {"params", {{"lambda1", 0.5}}},
                                {"params_by_metric", {{"map", {{"lambda2", 0.1}}}, {"acc_at_k", {{"lambda2", 1.0}}}}}}}}};
  const auto c = parse_benchmark_config(j);
  ASSERT_EQ(c.methods.size(), 1u);
  EXPECT_EQ(c.methods[0].name, "jfssl_tuned");
  EXPECT_EQ(effective_params(c.methods[0], MetricMode::map).at("lambda2"), 0.1);
  EXPECT_EQ(effective_params(c.methods[0], MetricMode::acc_at_k).at("lambda2"), 1.0);
  EXPECT_EQ(effective_params(c.methods[0], MetricMode::acc_at_k).at("lambda1"), 0.5);
}

TEST(Sweep, SingleCellMatchesPlainRun) {
  BenchmarkConfig c = config_for({"jfssl"}, 2);
  const auto data = make_synthetic(small_spec());
  const auto sweep = lambda_sweep(c, data, Method::jfssl, {0.1}, {0.01});
  c.methods[0].params = {{"lambda1", 0.1}, {"lambda2", 0.01}};
  const auto plain = run_benchmark(c, data);
  EXPECT_DOUBLE_EQ(sweep.mean[0](0, 0), plain.methods[0].directions[0].summary->mean);
  EXPECT_DOUBLE_EQ(sweep.mean[1](0, 0), plain.methods[0].directions[1].summary->mean);
  const json js = to_json(sweep);
  EXPECT_EQ(js["surface"]["a2b"].size(), 1u);
  EXPECT_EQ(default_lambda_grid().size(), 8u);
  EXPECT_THROW(lambda_sweep(c, data, Method::cca, {0.1}, {0.1}), Error);
}

TEST(Timing, MeasureFitTimeIsPositive) {
  const auto data = make_synthetic(small_spec());
  MethodSpec spec;
  spec.method = Method::cdfe;
  EXPECT_GT(measure_fit_time(spec, data), 0.0);
}
