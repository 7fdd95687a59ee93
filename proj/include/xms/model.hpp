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

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "xms/dataset_io.hpp"
#include "xms/error.hpp"
#include "xms/preprocess.hpp"

namespace xms {

enum class Method { cca, pls, blm, gmlda, gmmfa, cdfe, cca3v, lcfs, jfssl };

inline constexpr std::array<Method, 9> kAllMethods = {Method::cca,   Method::pls,  Method::blm,
                                                      Method::gmlda, Method::gmmfa, Method::cdfe,
                                                      Method::cca3v, Method::lcfs, Method::jfssl};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::cca: return "CCA";
    case Method::pls: return "PLS";
    case Method::blm: return "BLM";
    case Method::gmlda: return "GMLDA";
    case Method::gmmfa: return "GMMFA";
    case Method::cdfe: return "CDFE";
    case Method::cca3v: return "CCA3V";
    case Method::lcfs: return "LCFS";
    case Method::jfssl: return "JFSSL";
  }
  return "?";
}

/// Case-insensitive; accepts "cca-3v" style spellings.
inline Method parse_method(std::string_view text) {
  std::string key;
  for (char ch : text)
    if (std::isalnum(static_cast<unsigned char>(ch)))
      key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  for (Method m : kAllMethods)
    if (key == method_name(m)) return m;
  fail(Errc::config, "unknown method '" + std::string(text) + "'");
}

inline bool is_supervised(Method m) {
  return m != Method::cca && m != Method::pls && m != Method::blm;
}

enum class Modality { a, b };

/// Training data after preprocessing: centered (or PCA-reduced) columns.
struct TrainingSet {
  Matrix xa;
  Matrix xb;
  std::vector<int> labels;  // 1-based
  int classes = 0;

  Index size() const { return xa.cols(); }
};

/// Output of a core fitter, before the preprocessing and timing wrapper.
struct Projections {
  Matrix wa;
  Matrix wb;
  Vector eigenvalues;                 // GEV fitters only; non-increasing
  std::vector<double> objective_trace;
  std::map<std::string, double> hyperparams;
  std::map<std::string, Matrix> aux;  // extra learned blocks, e.g. the CCA-3V label view
};

struct SubspaceModel {
  Method method = Method::cca;
  Matrix wa;  // (preprocessed d_a) x d
  Matrix wb;  // (preprocessed d_b) x d
  ModalityPreprocessor preprocess_a;
  ModalityPreprocessor preprocess_b;
  std::map<std::string, double> hyperparams;
  Vector eigenvalues;
  std::vector<double> objective_trace;
  std::map<std::string, Matrix> aux;
  double fit_seconds = 0.0;

  Index dim() const { return wa.cols(); }
};

/// W^T preprocess(X) for the requested modality; X holds raw input columns.
inline Matrix project(const SubspaceModel& model, const Matrix& x, Modality modality) {
  const auto& pre = modality == Modality::a ? model.preprocess_a : model.preprocess_b;
  const auto& w = modality == Modality::a ? model.wa : model.wb;
  const Matrix z = pre.apply(x);
  require(z.rows() == w.rows(), Errc::dimension_mismatch, "project: model and data disagree");
  return w.transpose() * z;
}

inline Matrix project(const SubspaceModel& model, const FeatureMatrix& x, Modality modality) {
  return project(model, x.values(), modality);
}

}  // namespace xms
