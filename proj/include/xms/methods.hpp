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

#include <chrono>
#include <map>
#include <set>
#include <string>

#include "xms/dataset_io.hpp"
#include "xms/methods/cca.hpp"
#include "xms/methods/cdfe.hpp"
#include "xms/methods/gma.hpp"
#include "xms/methods/pls.hpp"
#include "xms/methods/sparse_coupled.hpp"
#include "xms/model.hpp"
#include "xms/preprocess.hpp"

namespace xms {

/// A method plus its hyperparameters as a flat key/value map, the form used
/// by the CLI and benchmark configs. Unknown keys are rejected.
struct MethodSpec {
  Method method = Method::cca;
  std::map<std::string, double> params;
  PreprocessConfig preprocess;
  bool time_includes_preprocessing = false;
};

inline const std::set<std::string>& allowed_params(Method m) {
  static const std::map<Method, std::set<std::string>> table = {
      {Method::cca, {"dim", "ridge"}},
      {Method::pls, {"dim"}},
      {Method::blm, {"dim", "mu", "beta", "alpha", "ridge"}},
      {Method::gmlda, {"dim", "mu", "beta", "alpha", "ridge"}},
      {Method::gmmfa, {"dim", "mu", "beta", "alpha", "ridge", "k_intrinsic", "k_penalty"}},
      {Method::cdfe, {"dim", "alpha", "beta", "knn_k", "max_iters", "tol"}},
      {Method::cca3v, {"dim", "ridge"}},
      {Method::lcfs, {"lambda1", "lambda2", "max_iters", "tol", "eps", "ridge"}},
      {Method::jfssl, {"lambda1", "lambda2", "max_iters", "tol", "eps", "ridge", "graph_k"}},
  };
  return table.at(m);
}

/// Default subspace dimension: min(c - 1, 30) for supervised methods, 30 otherwise.
inline Index default_dim(Method m, int classes) {
  return is_supervised(m) ? std::max<Index>(1, std::min<Index>(classes - 1, 30)) : 30;
}

/// Largest dimension the method supports on data of the given shape.
inline Index max_dim(Method m, Index da, Index db, Index n) {
  switch (m) {
    case Method::cca:
    case Method::pls:
      return std::min({da, db, n - 1});
    case Method::cca3v:
      return std::min(da, db);
    default:
      return da + db;
  }
}

namespace detail {

inline double param_or(const std::map<std::string, double>& params, const std::string& key,
                       double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

inline std::optional<double> param_opt(const std::map<std::string, double>& params,
                                       const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

inline Index param_index(const std::map<std::string, double>& params, const std::string& key,
                         Index fallback) {
  const double v = param_or(params, key, static_cast<double>(fallback));
  require(std::isfinite(v) && v == std::floor(v), Errc::config, key + " must be an integer");
  return static_cast<Index>(v);
}

inline GmaVariant gma_variant(Method m) {
  return m == Method::blm ? GmaVariant::blm : m == Method::gmlda ? GmaVariant::gmlda : GmaVariant::gmmfa;
}

}  // namespace detail

inline SparseCoupledConfig sparse_config(const std::map<std::string, double>& params) {
  SparseCoupledConfig c;
  c.lambda1 = detail::param_or(params, "lambda1", c.lambda1);
  c.lambda2 = detail::param_or(params, "lambda2", c.lambda2);
  c.max_iters = static_cast<int>(detail::param_index(params, "max_iters", c.max_iters));
  c.tol = detail::param_or(params, "tol", c.tol);
  c.eps = detail::param_or(params, "eps", c.eps);
  c.ridge = detail::param_or(params, "ridge", c.ridge);
  c.graph_k = detail::param_index(params, "graph_k", c.graph_k);
  return c;
}

/// Runs the core fitter for `method` on already preprocessed training data.
inline Projections fit_projections(Method method, const TrainingSet& train,
                                   const std::map<std::string, double>& params) {
  for (const auto& [key, value] : params) {
    require(allowed_params(method).count(key) > 0, Errc::config,
            "parameter '" + key + "' does not apply to " + std::string(method_name(method)));
    require(std::isfinite(value), Errc::config, "parameter '" + key + "' is not finite");
  }
  const Index cap = max_dim(method, train.xa.rows(), train.xb.rows(), train.size());
  const Index dim = std::clamp<Index>(
      detail::param_index(params, "dim", default_dim(method, train.classes)), 1, std::max<Index>(cap, 1));
  switch (method) {
    case Method::cca:
      return fit_cca(train, CcaConfig{dim, detail::param_opt(params, "ridge")});
    case Method::pls:
      return fit_pls(train, PlsConfig{.dim = dim});
    case Method::blm:
    case Method::gmlda:
    case Method::gmmfa: {
      GmaConfig c;
      c.variant = detail::gma_variant(method);
      c.mu = detail::param_or(params, "mu", c.mu);
      c.beta = detail::param_or(params, "beta", c.beta);
      c.alpha = detail::param_or(params, "alpha", c.alpha);
      c.mfa_k_intrinsic = detail::param_index(params, "k_intrinsic", c.mfa_k_intrinsic);
      c.mfa_k_penalty = detail::param_index(params, "k_penalty", c.mfa_k_penalty);
      c.dim = dim;
      c.ridge = detail::param_opt(params, "ridge");
      return fit_gma(train, c);
    }
    case Method::cdfe: {
      CdfeConfig c;
      c.alpha = detail::param_or(params, "alpha", c.alpha);
      c.beta = detail::param_or(params, "beta", c.beta);
      c.knn_k = detail::param_index(params, "knn_k", c.knn_k);
      c.max_iters = static_cast<int>(detail::param_index(params, "max_iters", c.max_iters));
      c.tol = detail::param_or(params, "tol", c.tol);
      c.dim = dim;
      return fit_cdfe(train, c);
    }
    case Method::cca3v:
      return fit_cca3v(train, Cca3vConfig{dim, detail::param_opt(params, "ridge")});
    case Method::lcfs:
      return fit_lcfs(train, sparse_config(params));
    case Method::jfssl:
      return fit_jfssl(train, sparse_config(params));
  }
  fail(Errc::internal, "unhandled method");
}

/// Wall-clock seconds of one call; never reports zero.
template <class F>
double measure_seconds(F&& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  const auto stop = std::chrono::steady_clock::now();
  return std::max(std::chrono::duration<double>(stop - start).count(), 1e-9);
}

/// Fits preprocessing on the training pairs, then the subspace method.
/// fit_seconds covers the projection learning only unless
/// spec.time_includes_pca is set.
inline SubspaceModel fit_model(const PairedMultimodalDataset& train, const MethodSpec& spec) {
  SubspaceModel model;
  model.method = spec.method;
  TrainingSet ts;
  const double pre_seconds = measure_seconds([&] {
    model.preprocess_a = fit_preprocessor(train.xa().values(), spec.preprocess);
    model.preprocess_b = fit_preprocessor(train.xb().values(), spec.preprocess);
    ts.xa = model.preprocess_a.apply(train.xa().values());
    ts.xb = model.preprocess_b.apply(train.xb().values());
  });
  ts.labels = train.labels();
  ts.classes = train.classes();
  Projections p;
  const double fit_seconds = measure_seconds([&] { p = fit_projections(spec.method, ts, spec.params); });
  require(p.wa.allFinite() && p.wb.allFinite(), Errc::divergence,
          std::string(method_name(spec.method)) + ": non-finite projection");
  model.wa = std::move(p.wa);
  model.wb = std::move(p.wb);
  model.eigenvalues = std::move(p.eigenvalues);
  model.objective_trace = std::move(p.objective_trace);
  model.hyperparams = std::move(p.hyperparams);
  model.aux = std::move(p.aux);
  model.fit_seconds = fit_seconds + (spec.time_includes_preprocessing ? pre_seconds : 0.0);
  return model;
}

}  // namespace xms
