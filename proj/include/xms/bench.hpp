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

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "xms/dataset_io.hpp"
#include "xms/methods.hpp"
#include "xms/retrieval_eval.hpp"
#include "xms/stats.hpp"
#include "xms/synthetic.hpp"

namespace xms {

inline constexpr const char* kVersion = "1.0.0";

enum class MetricMode { map, acc_at_k };

struct BenchMethod {
  std::string name;  // report key; defaults to the method name
  Method method = Method::cca;
  std::map<std::string, double> params;
  std::map<std::string, double> params_map;  // overrides in map mode
  std::map<std::string, double> params_acc;  // overrides in acc_at_k mode
  PreprocessConfig preprocess;
};

struct BenchmarkConfig {
  std::string dataset;  // directory; empty when `synthetic` is set
  std::optional<SyntheticSpec> synthetic;
  std::vector<BenchMethod> methods;
  int repetitions = 50;
  Index n_train = 0;  // 0: three quarters of the pairs
  std::uint64_t base_seed = 0;
  bool stratified = false;
  MetricMode metric = MetricMode::map;
  std::vector<Index> acc_ks = {1, 5, 10};
  std::optional<Index> map_cutoff;
  unsigned threads = 1;  // 0: hardware concurrency
  bool time_includes_pca = false;
  std::string ttest_baseline;  // empty: no t-tests in the report
  bool welch = false;
  nlohmann::json echo;  // the config as given, for the report
};

namespace detail {

inline std::map<std::string, double> numeric_map(const nlohmann::json& j, const std::string& where) {
  std::map<std::string, double> out;
  if (j.is_null()) return out;
  require(j.is_object(), Errc::config, where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    require(v.is_number(), Errc::config, where + "." + k + " must be a number");
    out[k] = v.get<double>();
  }
  return out;
}

/// Accepts {"pca": false}, {"pca_energy": rho}, {"pca_dim": k} plus optional
/// "center" and "l2_normalize" flags.
inline PreprocessConfig parse_preprocess(const nlohmann::json& j, PreprocessConfig base) {
  if (j.is_null()) return base;
  require(j.is_object(), Errc::config, "preprocess must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "pca") {
      require(v.is_boolean(), Errc::config, "preprocess.pca must be a boolean");
      base.pca = v.get<bool>() ? std::optional<PcaTarget>(PcaTarget{}) : std::nullopt;
    } else if (k == "pca_energy") {
      const double rho = v.get<double>();
      require(rho > 0.0 && rho <= 1.0, Errc::config, "pca_energy must lie in (0, 1]");
      base.pca = PcaTarget::fraction(rho);
    } else if (k == "pca_dim") {
      require(v.is_number_integer() && v.get<Index>() >= 1, Errc::config, "pca_dim must be a positive integer");
      base.pca = PcaTarget::fixed(v.get<Index>());
    } else if (k == "center") {
      base.center = v.get<bool>();
    } else if (k == "l2_normalize") {
      base.l2_normalize = v.get<bool>();
    } else {
      fail(Errc::config, "unknown preprocess key '" + k + "'");
    }
  }
  return base;
}

// Exact report name first, then any spelling of a method's canonical name.
inline std::optional<std::string> resolve_name(const std::set<std::string>& names, const std::string& text) {
  if (names.count(text) > 0) return text;
  try {
    const std::string canonical(method_name(parse_method(text)));
    if (names.count(canonical) > 0) return canonical;
  } catch (const Error&) {
  }
  return std::nullopt;
}

inline SyntheticSpec parse_synthetic(const nlohmann::json& j) {
  SyntheticSpec s;
  require(j.is_object(), Errc::config, "synthetic must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "n") s.n = v.get<Index>();
    else if (k == "classes") s.classes = v.get<int>();
    else if (k == "da") s.da = v.get<Index>();
    else if (k == "db") s.db = v.get<Index>();
    else if (k == "latent_dim") s.latent_dim = v.get<Index>();
    else if (k == "class_separation") s.class_separation = v.get<double>();
    else if (k == "instance_scale") s.instance_scale = v.get<double>();
    else if (k == "nuisance_dim") s.nuisance_dim = v.get<Index>();
    else if (k == "nuisance_scale") s.nuisance_scale = v.get<double>();
    else if (k == "noise") s.noise = v.get<double>();
    else if (k == "seed") s.seed = v.get<std::uint64_t>();
    else fail(Errc::config, "unknown synthetic key '" + k + "'");
  }
  return s;
}

}  // namespace detail

inline BenchmarkConfig parse_benchmark_config(const nlohmann::json& j) {
  require(j.is_object(), Errc::config, "benchmark config must be an object");
  static const std::set<std::string> known = {
      "dataset", "synthetic", "methods", "repetitions", "n_train", "base_seed", "stratified", "metric",
      "acc_ks", "map_cutoff", "threads", "time_includes_pca", "preprocess", "ttest_baseline", "welch"};
  for (const auto& [k, v] : j.items()) require(known.count(k) > 0, Errc::config, "unknown config key '" + k + "'");

  BenchmarkConfig c;
  c.echo = j;
  try {
    if (j.contains("dataset")) c.dataset = j["dataset"].get<std::string>();
    if (j.contains("synthetic")) c.synthetic = detail::parse_synthetic(j["synthetic"]);
    require(!c.dataset.empty() || c.synthetic, Errc::config, "config needs 'dataset' or 'synthetic'");
    c.repetitions = j.value("repetitions", c.repetitions);
    c.n_train = j.value("n_train", c.n_train);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.stratified = j.value("stratified", c.stratified);
    const std::string metric = j.value("metric", std::string("map"));
    require(metric == "map" || metric == "acc_at_k", Errc::config, "metric must be 'map' or 'acc_at_k'");
    c.metric = metric == "map" ? MetricMode::map : MetricMode::acc_at_k;
    if (j.contains("acc_ks")) c.acc_ks = j["acc_ks"].get<std::vector<Index>>();
    if (j.contains("map_cutoff") && !j["map_cutoff"].is_null()) c.map_cutoff = j["map_cutoff"].get<Index>();
    c.threads = j.value("threads", c.threads);
    c.time_includes_pca = j.value("time_includes_pca", c.time_includes_pca);
    c.ttest_baseline = j.value("ttest_baseline", std::string());
    c.welch = j.value("welch", c.welch);
    const PreprocessConfig global = detail::parse_preprocess(j.value("preprocess", nlohmann::json()), PreprocessConfig{});

    require(j.contains("methods") && j["methods"].is_array() && !j["methods"].empty(), Errc::config,
            "config needs a non-empty 'methods' list");
    for (const auto& m : j["methods"]) {
      BenchMethod bm;
      if (m.is_string()) {
        bm.method = parse_method(m.get<std::string>());
        bm.preprocess = global;
      } else {
        require(m.is_object() && m.contains("method"), Errc::config, "each method needs a 'method' field");
        bm.method = parse_method(m["method"].get<std::string>());
        bm.name = m.value("name", std::string());
        bm.params = detail::numeric_map(m.value("params", nlohmann::json()), "params");
        if (m.contains("params_by_metric")) {
          const auto& pm = m["params_by_metric"];
          bm.params_map = detail::numeric_map(pm.value("map", nlohmann::json()), "params_by_metric.map");
          bm.params_acc = detail::numeric_map(pm.value("acc_at_k", nlohmann::json()), "params_by_metric.acc_at_k");
        }
        bm.preprocess = detail::parse_preprocess(m.value("preprocess", nlohmann::json()), global);
      }
      if (bm.name.empty()) bm.name = method_name(bm.method);
      c.methods.push_back(std::move(bm));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::config, std::string("bad config value: ") + e.what());
  }
  require(c.repetitions >= 1, Errc::config, "repetitions must be at least 1");
  require(c.n_train >= 0, Errc::config, "n_train must be non-negative");
  std::set<std::string> names;
  for (const auto& m : c.methods)
    require(names.insert(m.name).second, Errc::config, "duplicate method name '" + m.name + "'");
  if (!c.ttest_baseline.empty()) {
    const auto resolved = detail::resolve_name(names, c.ttest_baseline);
    require(resolved.has_value(), Errc::config,
            "ttest_baseline '" + c.ttest_baseline + "' is not a configured method");
    c.ttest_baseline = *resolved;
  }
  return c;
}

inline PairedMultimodalDataset load_benchmark_dataset(const BenchmarkConfig& c) {
  return c.synthetic ? make_synthetic(*c.synthetic) : load_dataset(c.dataset);
}

inline std::map<std::string, double> effective_params(const BenchMethod& m, MetricMode mode) {
  auto p = m.params;
  for (const auto& [k, v] : mode == MetricMode::map ? m.params_map : m.params_acc) p[k] = v;
  return p;
}

// ---------------------------------------------------------------------------

struct DirectionReport {
  std::vector<std::optional<double>> runs;  // primary metric per repetition; nullopt if missing
  std::optional<SummaryStats> summary;
  std::optional<BoxStats> box;
  std::vector<double> cmc_mean;  // over successful repetitions
  std::map<Index, double> acc_mean;
};

struct MissingCell {
  int repetition = 0;
  std::string reason;
};

struct MethodReport {
  std::string name;
  Method method = Method::cca;
  DirectionReport directions[2];
  std::vector<std::optional<double>> fit_seconds;
  double fit_seconds_mean = std::numeric_limits<double>::quiet_NaN();
  double fit_seconds_var = std::numeric_limits<double>::quiet_NaN();
  std::vector<MissingCell> missing;
};

struct TTestEntry {
  std::string baseline;
  std::string method;
  std::string direction;  // a2b, b2a or average
  std::size_t n_baseline = 0;
  std::size_t n_method = 0;
  TTestResult result;
};

struct ExperimentReport {
  nlohmann::json config;
  MetricMode metric = MetricMode::map;
  int repetitions = 0;
  Index n_train = 0;
  Index n_test = 0;
  std::vector<MethodReport> methods;
  std::vector<TTestEntry> ttests;
  bool incomplete = false;
  nlohmann::json environment;

  const MethodReport& method(const std::string& name) const {
    std::set<std::string> names;
    for (const auto& m : methods) names.insert(m.name);
    if (const auto resolved = detail::resolve_name(names, name))
      for (const auto& m : methods)
        if (m.name == *resolved) return m;
    fail(Errc::invalid_argument, "no method '" + name + "' in report");
  }
};

namespace detail {

struct CellResult {
  bool ok = false;
  std::string reason;
  double fit_seconds = 0.0;
  double primary[2] = {0.0, 0.0};
  std::vector<double> cmc[2];
};

inline std::vector<double> present(const std::vector<std::optional<double>>& v) {
  std::vector<double> out;
  for (const auto& x : v)
    if (x) out.push_back(*x);
  return out;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers; each index is
/// processed exactly once so results do not depend on scheduling.
template <class F>
void parallel_for(int count, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
  for (auto& th : pool) th.join();
}

inline nlohmann::json environment_stamp(unsigned threads) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  return {{"xms_version", kVersion},
          {"compiler", __VERSION__},
          {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"threads", threads},
          {"hardware_concurrency", std::thread::hardware_concurrency()},
          {"timestamp", ts.str()}};
}

inline std::vector<double> direction_average(const MethodReport& m) {
  std::vector<double> out;
  for (std::size_t r = 0; r < m.directions[0].runs.size(); ++r)
    if (m.directions[0].runs[r] && m.directions[1].runs[r])
      out.push_back(0.5 * (*m.directions[0].runs[r] + *m.directions[1].runs[r]));
  return out;
}

}  // namespace detail

/// t-tests of every method against the baseline in each direction, plus a test
/// on the per-repetition direction averages. Pairs with fewer than two values
/// on either side are skipped.
inline std::vector<TTestEntry> compare_to_baseline(const ExperimentReport& report, const std::string& baseline,
                                                   bool welch = false) {
  const MethodReport& base = report.method(baseline);
  std::vector<TTestEntry> out;
  for (const auto& m : report.methods) {
    if (&m == &base) continue;
    for (int d = 0; d < 3; ++d) {
      const std::vector<double> a = d < 2 ? detail::present(base.directions[d].runs) : detail::direction_average(base);
      const std::vector<double> b = d < 2 ? detail::present(m.directions[d].runs) : detail::direction_average(m);
      if (a.size() < 2 || b.size() < 2) continue;
      TTestEntry e;
      e.baseline = base.name;
      e.method = m.name;
      e.direction = d == 0 ? "a2b" : d == 1 ? "b2a" : "average";
      e.n_baseline = a.size();
      e.n_method = b.size();
      e.result = students_t_test(a, b, welch);
      out.push_back(std::move(e));
    }
  }
  return out;
}

/// The repeated-split protocol on an already loaded dataset.
inline ExperimentReport run_benchmark(const BenchmarkConfig& config, const PairedMultimodalDataset& data) {
  const Index n = data.size();
  const Index n_train = config.n_train > 0 ? config.n_train : (3 * n) / 4;
  require(n_train >= 2 && n_train < n, Errc::config,
          "n_train must lie in [2, n); got " + std::to_string(n_train) + " for n = " + std::to_string(n));
  const Index n_test = n - n_train;
  if (config.metric == MetricMode::acc_at_k)
    for (Index k : config.acc_ks)
      require(k >= 1 && k <= n_test, Errc::config, "acc_ks entries must lie in 1..n_test");

  const std::size_t n_methods = config.methods.size();
  const auto reps = static_cast<std::size_t>(config.repetitions);
  std::vector<std::vector<detail::CellResult>> cells(reps, std::vector<detail::CellResult>(n_methods));

  detail::parallel_for(config.repetitions, config.threads, [&](int r) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(r);
    const SplitPlan plan = config.stratified ? stratified_split(data.labels(), data.classes(), n_train, seed)
                                             : random_split(n, n_train, seed);
    const PairedMultimodalDataset train = subset(data, plan.train);
    const PairedMultimodalDataset test = subset(data, plan.test);
    for (std::size_t m = 0; m < n_methods; ++m) {
      const BenchMethod& bm = config.methods[m];
      detail::CellResult& cell = cells[static_cast<std::size_t>(r)][m];
      try {
        MethodSpec spec{bm.method, effective_params(bm, config.metric), bm.preprocess, config.time_includes_pca};
        const SubspaceModel model = fit_model(train, spec);
        const Matrix pa = project(model, test.xa(), Modality::a);
        const Matrix pb = project(model, test.xb(), Modality::b);
        for (int d = 0; d < 2; ++d) {
          const auto ev = evaluate_retrieval(pa, pb, test.labels(), d == 0 ? Direction::a2b : Direction::b2a,
                                             config.map_cutoff);
          cell.cmc[d] = ev.cmc;
          cell.primary[d] = config.metric == MetricMode::map ? ev.map
                                                             : ev.cmc[static_cast<std::size_t>(config.acc_ks.front() - 1)];
        }
        cell.fit_seconds = model.fit_seconds;
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.reason = e.what();
      }
    }
  });

  ExperimentReport report;
  report.config = config.echo;
  report.metric = config.metric;
  report.repetitions = config.repetitions;
  report.n_train = n_train;
  report.n_test = n_test;
  for (std::size_t m = 0; m < n_methods; ++m) {
    MethodReport mr;
    mr.name = config.methods[m].name;
    mr.method = config.methods[m].method;
    std::vector<double> cmc_sum[2];
    std::size_t ok = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& cell = cells[r][m];
      if (!cell.ok) {
        mr.missing.push_back({static_cast<int>(r), cell.reason});
        mr.fit_seconds.push_back(std::nullopt);
        for (auto& d : mr.directions) d.runs.push_back(std::nullopt);
        continue;
      }
      ++ok;
      mr.fit_seconds.push_back(cell.fit_seconds);
      for (int d = 0; d < 2; ++d) {
        mr.directions[d].runs.push_back(cell.primary[d]);
        if (cmc_sum[d].empty()) cmc_sum[d].assign(cell.cmc[d].size(), 0.0);
        for (std::size_t k = 0; k < cell.cmc[d].size(); ++k) cmc_sum[d][k] += cell.cmc[d][k];
      }
    }
    for (int d = 0; d < 2; ++d) {
      DirectionReport& dr = mr.directions[d];
      const auto vals = detail::present(dr.runs);
      if (!vals.empty()) {
        dr.summary = summarize(vals);
        dr.box = box_stats(vals);
        dr.cmc_mean = cmc_sum[d];
        for (double& v : dr.cmc_mean) v /= static_cast<double>(ok);
        for (Index k : config.acc_ks)
          if (k >= 1 && static_cast<std::size_t>(k) <= dr.cmc_mean.size())
            dr.acc_mean[k] = dr.cmc_mean[static_cast<std::size_t>(k - 1)];
      }
    }
    const auto secs = detail::present(mr.fit_seconds);
    if (!secs.empty()) {
      const SummaryStats s = summarize(secs);
      mr.fit_seconds_mean = s.mean;
      mr.fit_seconds_var = s.var;
    }
    if (!mr.missing.empty()) report.incomplete = true;
    report.methods.push_back(std::move(mr));
  }
  if (!config.ttest_baseline.empty()) report.ttests = compare_to_baseline(report, config.ttest_baseline, config.welch);
  report.environment = detail::environment_stamp(config.threads);
  return report;
}

inline ExperimentReport run_benchmark(const BenchmarkConfig& config) {
  return run_benchmark(config, load_benchmark_dataset(config));
}

// ---------------------------------------------------------------------------
// JSON and CSV emission.

namespace detail {

inline nlohmann::json optional_vector(const std::vector<std::optional<double>>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& x : v) out.push_back(x ? nlohmann::json(*x) : nlohmann::json(nullptr));
  return out;
}

inline nlohmann::json nan_to_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace detail

inline nlohmann::json to_json(const SummaryStats& s) {
  return {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"var", s.var}, {"std", s.std}, {"count", s.count}};
}

inline nlohmann::json to_json(const BoxStats& b) {
  return {{"median", b.median}, {"q25", b.q25}, {"q75", b.q75},
          {"whisker_low", b.whisker_low}, {"whisker_high", b.whisker_high}, {"outliers", b.outliers}};
}

inline nlohmann::json to_json(const TTestEntry& e) {
  return {{"baseline", e.baseline},
          {"method", e.method},
          {"direction", e.direction},
          {"n_baseline", e.n_baseline},
          {"n_method", e.n_method},
          {"t_statistic", detail::nan_to_null(e.result.t_statistic)},
          {"t_statistic_sign", e.result.t_statistic > 0 ? 1 : e.result.t_statistic < 0 ? -1 : 0},
          {"p_value", e.result.p_value},
          {"degrees_of_freedom", e.result.degrees_of_freedom},
          {"significant_at_005", e.result.significant_at_005}};
}

/// Report body. Timing fields and the environment stamp are the only parts
/// that vary between identical runs.
inline nlohmann::json to_json(const ExperimentReport& r) {
  const std::string metric_key = r.metric == MetricMode::map ? "map_runs" : "acc_runs";
  nlohmann::json methods = nlohmann::json::object();
  nlohmann::json boxes = nlohmann::json::object();
  for (const auto& m : r.methods) {
    nlohmann::json dirs = nlohmann::json::object();
    nlohmann::json mbox = nlohmann::json::object();
    for (int d = 0; d < 2; ++d) {
      const DirectionReport& dr = m.directions[d];
      const char* dn = d == 0 ? "a2b" : "b2a";
      nlohmann::json acc = nlohmann::json::object();
      for (const auto& [k, v] : dr.acc_mean) acc[std::to_string(k)] = v;
      dirs[dn] = {{metric_key, detail::optional_vector(dr.runs)},
                  {"summary", dr.summary ? to_json(*dr.summary) : nlohmann::json(nullptr)},
                  {"cmc_mean", dr.cmc_mean},
                  {"acc_at_k_mean", acc}};
      if (metric_key != "map_runs") dirs[dn]["map_runs"] = nullptr;
      mbox[dn] = dr.box ? to_json(*dr.box) : nlohmann::json(nullptr);
    }
    nlohmann::json missing = nlohmann::json::array();
    for (const auto& c : m.missing) missing.push_back({{"repetition", c.repetition}, {"reason", c.reason}});
    methods[m.name] = {{"method", method_name(m.method)},
                       {"directions", dirs},
                       {"fit_seconds_runs", detail::optional_vector(m.fit_seconds)},
                       {"fit_seconds_mean", detail::nan_to_null(m.fit_seconds_mean)},
                       {"fit_seconds_var", detail::nan_to_null(m.fit_seconds_var)},
                       {"missing", missing}};
    boxes[m.name] = mbox;
  }
  nlohmann::json tt = nlohmann::json::array();
  for (const auto& e : r.ttests) tt.push_back(to_json(e));
  return {{"config", r.config},
          {"metric", r.metric == MetricMode::map ? "map" : "acc_at_k"},
          {"repetitions", r.repetitions},
          {"n_train", r.n_train},
          {"n_test", r.n_test},
          {"incomplete", r.incomplete},
          {"methods", methods},
          {"ttests", tt},
          {"box_stats", boxes},
          {"environment", r.environment}};
}

/// Rebuilds the fields needed for t-tests from a report JSON.
inline ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  try {
    r.config = j.at("config");
    r.metric = j.value("metric", std::string("map")) == "map" ? MetricMode::map : MetricMode::acc_at_k;
    r.repetitions = j.value("repetitions", 0);
    const std::string key = r.metric == MetricMode::map ? "map_runs" : "acc_runs";
    for (const auto& [name, m] : j.at("methods").items()) {
      MethodReport mr;
      mr.name = name;
      mr.method = parse_method(m.value("method", name));
      for (int d = 0; d < 2; ++d)
        for (const auto& v : m.at("directions").at(d == 0 ? "a2b" : "b2a").at(key))
          mr.directions[d].runs.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
      r.methods.push_back(std::move(mr));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_file, std::string("report JSON: ") + e.what());
  }
  return r;
}

/// One row per method in the layout min, max, mean, var, std for each
/// direction, followed by the mean fit time.
inline void write_report_csv(std::ostream& out, const ExperimentReport& r) {
  out << "method";
  for (const char* d : {"a2b", "b2a"})
    for (const char* s : {"min", "max", "mean", "var", "std"}) out << ',' << d << '_' << s;
  out << ",fit_seconds_mean,missing\n";
  out << std::setprecision(10);
  for (const auto& m : r.methods) {
    out << m.name;
    for (const auto& d : m.directions) {
      if (d.summary)
        out << ',' << d.summary->min << ',' << d.summary->max << ',' << d.summary->mean << ',' << d.summary->var << ','
            << d.summary->std;
      else
        out << ",,,,,";
    }
    out << ',';
    if (std::isfinite(m.fit_seconds_mean)) out << m.fit_seconds_mean;
    out << ',' << m.missing.size() << '\n';
  }
}

// ---------------------------------------------------------------------------

struct SweepResult {
  Method method = Method::lcfs;
  std::vector<double> lambda1;
  std::vector<double> lambda2;
  Matrix mean[2];  // rows: lambda1, cols: lambda2; NaN where every repetition failed
  std::vector<std::string> missing;
};

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid = {0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  return grid;
}

/// Mean primary metric over the repeated protocol for each (lambda1, lambda2)
/// cell, with every other setting taken from the config's entry for `method`
/// (or defaults when the config does not list it).
inline SweepResult lambda_sweep(const BenchmarkConfig& config, const PairedMultimodalDataset& data, Method method,
                                const std::vector<double>& grid1, const std::vector<double>& grid2) {
  require(method == Method::lcfs || method == Method::jfssl, Errc::config, "lambda_sweep supports LCFS and JFSSL");
  require(!grid1.empty() && !grid2.empty(), Errc::config, "lambda grid is empty");
  for (double v : grid1) require(v >= 0.0 && std::isfinite(v), Errc::config, "lambda grid values must be >= 0");
  for (double v : grid2) require(v >= 0.0 && std::isfinite(v), Errc::config, "lambda grid values must be >= 0");

  BenchMethod base;
  base.method = method;
  base.name = method_name(method);
  base.preprocess = config.methods.empty() ? PreprocessConfig{} : config.methods.front().preprocess;
  for (const auto& m : config.methods)
    if (m.method == method) base = m;

  SweepResult out;
  out.method = method;
  out.lambda1 = grid1;
  out.lambda2 = grid2;
  for (auto& m : out.mean) m.setConstant(static_cast<Index>(grid1.size()), static_cast<Index>(grid2.size()),
                                          std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < grid1.size(); ++i) {
    for (std::size_t k = 0; k < grid2.size(); ++k) {
      BenchmarkConfig cell = config;
      BenchMethod bm = base;
      bm.params["lambda1"] = grid1[i];
      bm.params["lambda2"] = grid2[k];
      bm.params_map.erase("lambda1");
      bm.params_map.erase("lambda2");
      bm.params_acc.erase("lambda1");
      bm.params_acc.erase("lambda2");
      cell.methods = {bm};
      cell.ttest_baseline.clear();
      const ExperimentReport rep = run_benchmark(cell, data);
      const MethodReport& mr = rep.methods.front();
      for (int d = 0; d < 2; ++d)
        if (mr.directions[d].summary)
          out.mean[d](static_cast<Index>(i), static_cast<Index>(k)) = mr.directions[d].summary->mean;
      for (const auto& c : mr.missing) {
        std::ostringstream s;
        s << "lambda1=" << grid1[i] << " lambda2=" << grid2[k] << " repetition " << c.repetition << ": "
          << c.reason;
        out.missing.push_back(s.str());
      }
    }
  }
  return out;
}

inline nlohmann::json to_json(const SweepResult& s) {
  nlohmann::json surf = nlohmann::json::object();
  for (int d = 0; d < 2; ++d) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < s.mean[d].rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Index k = 0; k < s.mean[d].cols(); ++k) row.push_back(detail::nan_to_null(s.mean[d](i, k)));
      rows.push_back(row);
    }
    surf[d == 0 ? "a2b" : "b2a"] = rows;
  }
  return {{"method", method_name(s.method)},
          {"lambda1", s.lambda1},
          {"lambda2", s.lambda2},
          {"surface", surf},
          {"missing", s.missing}};
}

/// Wall-clock seconds of one fit on already split training pairs.
inline double measure_fit_time(const MethodSpec& spec, const PairedMultimodalDataset& train) {
  return fit_model(train, spec).fit_seconds;
}

}  // namespace xms
