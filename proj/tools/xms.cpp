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

// Command-line front end: fit, eval, bench, sweep, ttest and synth.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "xms/xms.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Plain YAML scalars become numbers, booleans or null where they parse as
// such; quoted scalars stay strings.
json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(yaml_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return out;
    }
    case YAML::NodeType::Scalar: {
      const std::string text = node.Scalar();
      if (node.Tag() == "!") return text;
      if (text == "true" || text == "True") return true;
      if (text == "false" || text == "False") return false;
      if (text == "null" || text == "~") return nullptr;
      try {
        std::size_t used = 0;
        const long long i = std::stoll(text, &used);
        if (used == text.size()) return i;
      } catch (const std::exception&) {
      }
      try {
        std::size_t used = 0;
        const double d = std::stod(text, &used);
        if (used == text.size()) return d;
      } catch (const std::exception&) {
      }
      return text;
    }
  }
  return nullptr;
}

json read_config(const fs::path& path) {
  std::ifstream in(path);
  xms::require(in.good(), xms::Errc::config, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json j;
  try {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (path.extension() == ".json" || (first != std::string::npos && text[first] == '{'))
      j = json::parse(text);
    else
      j = yaml_to_json(YAML::Load(text));
  } catch (const json::exception& e) {
    xms::fail(xms::Errc::config, path.string() + ": " + e.what());
  } catch (const YAML::Exception& e) {
    xms::fail(xms::Errc::config, path.string() + ": " + e.what());
  }
  // Relative dataset paths are taken from the config file's directory.
  if (j.is_object() && j.contains("dataset") && j["dataset"].is_string()) {
    const fs::path ds = j["dataset"].get<std::string>();
    if (ds.is_relative()) j["dataset"] = (path.parent_path() / ds).lexically_normal().string();
  }
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  xms::require(out.good(), xms::Errc::missing_file, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      xms::require(used == item.size(), xms::Errc::config, "bad grid value '" + item + "'");
    } catch (const std::logic_error&) {
      xms::fail(xms::Errc::config, "bad grid value '" + item + "'");
    }
  }
  xms::require(!out.empty(), xms::Errc::config, "empty grid");
  return out;
}

struct FitOptions {
  std::string dataset, method, out;
  std::optional<double> pca_energy;
  std::optional<xms::Index> pca_dim;
  bool no_pca = false;
  bool l2 = false;
  std::optional<xms::Index> dim;
  std::optional<double> lambda1, lambda2, mu, alpha, beta, ridge;
  std::optional<xms::Index> n_train;
  std::uint64_t seed = 0;
};

int run_fit(const FitOptions& o) {
  xms::MethodSpec spec;
  spec.method = xms::parse_method(o.method);
  if (o.no_pca)
    spec.preprocess.pca.reset();
  else if (o.pca_dim)
    spec.preprocess.pca = xms::PcaTarget::fixed(*o.pca_dim);
  else if (o.pca_energy)
    spec.preprocess.pca = xms::PcaTarget::fraction(*o.pca_energy);
  spec.preprocess.l2_normalize = o.l2;
  auto put = [&](const char* key, const auto& v) {
    if (v) spec.params[key] = static_cast<double>(*v);
  };
  put("dim", o.dim);
  put("lambda1", o.lambda1);
  put("lambda2", o.lambda2);
  put("mu", o.mu);
  put("alpha", o.alpha);
  put("beta", o.beta);
  put("ridge", o.ridge);
  xms::PairedMultimodalDataset data = xms::load_dataset(o.dataset);
  if (o.n_train) {
    const auto plan = xms::random_split(data.size(), *o.n_train, o.seed);
    data = xms::subset(data, plan.train);
  }
  const xms::SubspaceModel model = xms::fit_model(data, spec);
  xms::save_model(o.out, model);
  std::cout << "fitted " << xms::method_name(model.method) << " (dim " << model.dim() << ") on " << data.size()
            << " pairs in " << model.fit_seconds << " s\n";
  return 0;
}

int run_eval(const std::string& model_path, const std::string& dataset, const std::vector<std::string>& directions,
             const std::string& metrics, std::optional<xms::Index> cutoff, const std::string& out) {
  const auto model = xms::load_model(model_path);
  const auto data = xms::load_dataset(dataset);
  const xms::Matrix pa = xms::project(model, data.xa(), xms::Modality::a);
  const xms::Matrix pb = xms::project(model, data.xb(), xms::Modality::b);
  bool want_map = false, want_cmc = false;
  std::stringstream ss(metrics);
  std::string m;
  while (std::getline(ss, m, ',')) {
    if (m == "map")
      want_map = true;
    else if (m == "cmc")
      want_cmc = true;
    else
      xms::fail(xms::Errc::config, "unknown metric '" + m + "' (expected map, cmc)");
  }
  json result = {{"model", model_path}, {"dataset", dataset}, {"method", xms::method_name(model.method)}};
  for (const auto& dname : directions) {
    const auto ev = xms::evaluate_retrieval(pa, pb, data.labels(), xms::parse_direction(dname), cutoff);
    json d = json::object();
    if (want_map) {
      d["map"] = ev.map;
      d["per_query_ap"] = ev.per_query_ap;
    }
    if (want_cmc) d["cmc"] = ev.cmc;
    d["zero_norm_vectors"] = ev.zero_norm_vectors;
    result[xms::direction_name(ev.direction)] = d;
    std::cout << xms::direction_name(ev.direction) << ": MAP " << ev.map << ", acc@1 " << ev.cmc.front() << '\n';
  }
  if (!out.empty()) write_json(out, result);
  return 0;
}

int run_bench(const std::string& config_path, const std::string& out, const std::string& csv,
              std::optional<unsigned> threads) {
  auto config = xms::parse_benchmark_config(read_config(config_path));
  if (threads) config.threads = *threads;
  const auto report = xms::run_benchmark(config);
  write_json(out, xms::to_json(report));
  if (!csv.empty()) {
    std::ofstream c(csv);
    xms::require(c.good(), xms::Errc::missing_file, "cannot write " + csv);
    xms::write_report_csv(c, report);
  }
  for (const auto& m : report.methods) {
    std::cout << m.name;
    for (int d = 0; d < 2; ++d) {
      if (m.directions[d].summary)
        std::cout << "  " << (d == 0 ? "a2b" : "b2a") << ' ' << m.directions[d].summary->mean << " +- "
                  << m.directions[d].summary->std;
      else
        std::cout << "  " << (d == 0 ? "a2b" : "b2a") << " n/a";
    }
    if (!m.missing.empty()) std::cout << "  (" << m.missing.size() << " missing)";
    std::cout << '\n';
  }
  if (report.incomplete) std::cerr << "warning: some repetitions failed; see 'missing' in the report\n";
  return 0;
}

int run_sweep(const std::string& config_path, const std::string& method, const std::string& grid,
              const std::string& grid2, const std::string& out) {
  const auto config = xms::parse_benchmark_config(read_config(config_path));
  const auto g1 = parse_grid(grid);
  const auto g2 = grid2.empty() ? g1 : parse_grid(grid2);
  const auto data = xms::load_benchmark_dataset(config);
  const auto result = xms::lambda_sweep(config, data, xms::parse_method(method), g1, g2);
  write_json(out, xms::to_json(result));
  std::cout << "swept " << g1.size() << " x " << g2.size() << " cells";
  if (!result.missing.empty()) std::cout << " (" << result.missing.size() << " failed repetitions)";
  std::cout << '\n';
  return 0;
}

int run_ttest(const std::string& report_path, const std::string& baseline, bool welch, const std::string& out) {
  std::ifstream in(report_path);
  xms::require(in.good(), xms::Errc::missing_file, "cannot open report " + report_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    xms::fail(xms::Errc::malformed_file, report_path + ": " + e.what());
  }
  const auto report = xms::report_from_json(j);
  std::set<std::string> names;
  for (const auto& m : report.methods) names.insert(m.name);
  const auto resolved = xms::detail::resolve_name(names, baseline);
  xms::require(resolved.has_value(), xms::Errc::config, "baseline '" + baseline + "' is not in the report");
  json arr = json::array();
  for (const auto& e : xms::compare_to_baseline(report, *resolved, welch)) {
    arr.push_back(xms::to_json(e));
    std::cout << e.method << " vs " << e.baseline << " [" << e.direction << "]: t = " << e.result.t_statistic
              << ", p = " << e.result.p_value << '\n';
  }
  if (!out.empty()) write_json(out, arr);
  return 0;
}

int run_synth(const std::string& out, const xms::SyntheticSpec& spec, const std::string& format) {
  xms::require(format == "csv" || format == "binary", xms::Errc::config, "format must be csv or binary");
  xms::save_dataset(out, xms::make_synthetic(spec), format == "csv" ? xms::MatrixFormat::csv : xms::MatrixFormat::binary);
  std::cout << "wrote " << spec.n << " synthetic pairs to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-modal subspace learning and retrieval benchmarking"};
  app.set_version_flag("--version", xms::kVersion);
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one method on a dataset and save the model");
  fit_cmd->add_option("--dataset", fit.dataset, "Dataset directory")->required();
  fit_cmd->add_option("--method", fit.method, "cca, pls, blm, gmlda, gmmfa, cdfe, cca3v, lcfs or jfssl")->required();
  fit_cmd->add_option("--out", fit.out, "Model file to write")->required();
  auto* energy = fit_cmd->add_option("--pca-energy", fit.pca_energy, "Retained PCA variance fraction (default 0.98)");
  auto* pdim = fit_cmd->add_option("--pca-dim", fit.pca_dim, "Fixed PCA dimension");
  auto* nopca = fit_cmd->add_flag("--no-pca", fit.no_pca, "Center only");
  energy->excludes(pdim)->excludes(nopca);
  pdim->excludes(nopca);
  fit_cmd->add_flag("--l2-normalize", fit.l2, "Unit-normalize raw samples before PCA");
  fit_cmd->add_option("--dim", fit.dim, "Subspace dimension");
  fit_cmd->add_option("--lambda1", fit.lambda1, "LCFS/JFSSL sparsity weight");
  fit_cmd->add_option("--lambda2", fit.lambda2, "LCFS trace-norm or JFSSL graph weight");
  fit_cmd->add_option("--mu", fit.mu, "GMA modality balance");
  fit_cmd->add_option("--alpha", fit.alpha, "GMA constraint balance or CDFE inter-class weight");
  fit_cmd->add_option("--beta", fit.beta, "GMA coupling or CDFE locality weight");
  fit_cmd->add_option("--ridge", fit.ridge, "Ridge added to constraint matrices");
  fit_cmd->add_option("--n-train", fit.n_train, "Fit on a random subset of this many pairs");
  fit_cmd->add_option("--seed", fit.seed, "Seed of the --n-train split");

  std::string model_path, dataset, metrics = "map,cmc", out, direction = "both";
  std::optional<xms::Index> cutoff;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on a paired dataset");
  eval_cmd->add_option("--model", model_path, "Model file")->required();
  eval_cmd->add_option("--dataset", dataset, "Dataset directory")->required();
  eval_cmd->add_option("--direction", direction, "a2b, b2a or both")->check(CLI::IsMember({"a2b", "b2a", "both"}));
  eval_cmd->add_option("--metrics", metrics, "Comma-separated subset of map,cmc");
  eval_cmd->add_option("--map-cutoff", cutoff, "Only the top R ranks count toward AP");
  eval_cmd->add_option("--out", out, "JSON output");

  std::string config_path, csv;
  std::optional<unsigned> threads;
  auto* bench_cmd = app.add_subcommand("bench", "Run the repeated-split benchmark");
  bench_cmd->add_option("--config", config_path, "YAML or JSON config")->required();
  bench_cmd->add_option("--out", out, "Report JSON")->required();
  bench_cmd->add_option("--csv", csv, "Summary table CSV");
  bench_cmd->add_option("--threads", threads, "Worker threads (0: all cores)");

  std::string sweep_method, grid = "0,0.0001,0.001,0.01,0.1,1,10,100", grid2;
  auto* sweep_cmd = app.add_subcommand("sweep", "Mean MAP over a lambda1 x lambda2 grid");
  sweep_cmd->add_option("--config", config_path, "YAML or JSON config")->required();
  sweep_cmd->add_option("--method", sweep_method, "lcfs or jfssl")->required();
  sweep_cmd->add_option("--grid", grid, "Comma-separated lambda1 values (also lambda2 unless --grid2)");
  sweep_cmd->add_option("--grid2", grid2, "Comma-separated lambda2 values");
  sweep_cmd->add_option("--out", out, "Surface JSON")->required();

  std::string report_path, baseline;
  bool welch = false;
  auto* ttest_cmd = app.add_subcommand("ttest", "t-tests of every method in a report against a baseline");
  ttest_cmd->add_option("--report", report_path, "Report JSON from bench")->required();
  ttest_cmd->add_option("--baseline", baseline, "Baseline method name")->required();
  ttest_cmd->add_flag("--welch", welch, "Unequal-variance form");
  ttest_cmd->add_option("--out", out, "JSON output");

  xms::SyntheticSpec synth;
  std::string format = "csv";
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic paired dataset");
  synth_cmd->add_option("--out", out, "Dataset directory")->required();
  synth_cmd->add_option("--n", synth.n, "Pairs");
  synth_cmd->add_option("--classes", synth.classes, "Classes");
  synth_cmd->add_option("--da", synth.da, "Modality A dimension");
  synth_cmd->add_option("--db", synth.db, "Modality B dimension");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--format", format, "csv or binary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(xms::ErrorClass::config);
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*eval_cmd) {
      std::vector<std::string> dirs = direction == "both" ? std::vector<std::string>{"a2b", "b2a"}
                                                           : std::vector<std::string>{direction};
      return run_eval(model_path, dataset, dirs, metrics, cutoff, out);
    }
    if (*bench_cmd) return run_bench(config_path, out, csv, threads);
    if (*sweep_cmd) return run_sweep(config_path, sweep_method, grid, grid2, out);
    if (*ttest_cmd) return run_ttest(report_path, baseline, welch, out);
    if (*synth_cmd) return run_synth(out, synth, format);
  } catch (const xms::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(xms::ErrorClass::numerical);
  }
  return 0;
}
