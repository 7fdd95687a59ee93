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

#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "xms/dataset_io.hpp"
#include "xms/error.hpp"
#include "xms/numerics.hpp"

namespace xms {

struct Centered {
  Vector mean;
  Matrix centered;
};

inline Centered center_fit(const Matrix& x) {
  require(x.cols() >= 1, Errc::invalid_argument, "center_fit: no samples");
  Centered out;
  out.mean = x.rowwise().mean();
  out.centered = x.colwise() - out.mean;
  return out;
}

struct PcaModel {
  Vector mean;          // d
  Matrix basis;         // d x k, orthonormal columns
  Vector eigenvalues;   // k, non-increasing
  double total_variance = 0.0;

  Index input_dim() const { return basis.rows(); }
  Index k() const { return basis.cols(); }
};

/// Either a fixed component count or the smallest count reaching an energy fraction.
struct PcaTarget {
  std::optional<Index> dim;
  double energy = 0.98;

  static PcaTarget fixed(Index k) { return PcaTarget{k, 1.0}; }
  static PcaTarget fraction(double rho) { return PcaTarget{std::nullopt, rho}; }
};

namespace detail {

// Completes the orthonormal columns of `basis` with further orthonormal
// columns, up to `k` in total.
inline Matrix complete_basis(const Matrix& basis, Index k) {
  if (basis.cols() >= k) return basis.leftCols(k);
  const Index d = basis.rows();
  Eigen::HouseholderQR<Matrix> qr(basis);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  Matrix out(d, k);
  out.leftCols(basis.cols()) = basis;
  out.rightCols(k - basis.cols()) = q.middleCols(basis.cols(), k - basis.cols());
  return out;
}

}  // namespace detail

/// Principal components of the sample covariance (1/(n-1)). Uses the d x d
/// covariance when d <= n and the n x n Gram matrix otherwise.
inline PcaModel pca_fit(const Matrix& x, const PcaTarget& target) {
  const Index d = x.rows();
  const Index n = x.cols();
  require(n >= 2, Errc::invalid_argument, "pca_fit: need at least two samples");
  const Index max_k = std::min(d, n - 1);
  if (target.dim) {
    require(*target.dim >= 1 && *target.dim <= max_k, Errc::invalid_argument,
            "pca_fit: k=" + std::to_string(*target.dim) + " exceeds min(d, n-1)=" +
                std::to_string(max_k));
  } else {
    require(target.energy > 0.0 && target.energy <= 1.0, Errc::invalid_argument,
            "pca_fit: energy fraction must lie in (0, 1]");
  }

  auto [mean, xc] = center_fit(x);
  const double scale = 1.0 / static_cast<double>(n - 1);

  Vector values;  // descending
  Matrix vectors; // d x m, descending order
  if (d <= n) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(scale * xc * xc.transpose());
    values = eig.eigenvalues().reverse();
    vectors = eig.eigenvectors().rowwise().reverse();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(xc.transpose() * xc);
    const Vector mu = eig.eigenvalues().reverse();
    const Matrix u = eig.eigenvectors().rowwise().reverse();
    const double cutoff = 1e-12 * std::max(mu(0), 0.0);
    Index rank = 0;
    while (rank < mu.size() && mu(rank) > cutoff && mu(rank) > 0.0) ++rank;
    Matrix b(d, rank);
    for (Index j = 0; j < rank; ++j) b.col(j) = xc * u.col(j) / std::sqrt(mu(j));
    vectors = detail::complete_basis(b, std::min(d, n));
    values = Vector::Zero(vectors.cols());
    values.head(rank) = scale * mu.head(rank);
  }
  values = values.cwiseMax(0.0);
  const double total = values.sum();

  Index k = 0;
  if (target.dim) {
    k = *target.dim;
  } else if (!(total > 0.0)) {
    k = 1;
  } else {
    double acc = 0.0;
    while (k < max_k) {
      acc += values(k);
      ++k;
      if (acc >= target.energy * total * (1.0 - 1e-12)) break;
    }
  }

  PcaModel model;
  model.mean = std::move(mean);
  model.basis = vectors.leftCols(k);
  canonicalize_signs(model.basis);
  model.eigenvalues = values.head(k);
  model.total_variance = total;
  return model;
}

/// basis^T (X - mean), k x n.
inline Matrix pca_apply(const PcaModel& model, const Matrix& x) {
  require(x.rows() == model.input_dim(), Errc::dimension_mismatch,
          "pca_apply: expected " + std::to_string(model.input_dim()) + " features, got " +
              std::to_string(x.rows()));
  return model.basis.transpose() * (x.colwise() - model.mean);
}

// ---------------------------------------------------------------------------
// Per-modality preprocessing pipeline stored inside fitted models.

struct PreprocessConfig {
  bool center = true;
  std::optional<PcaTarget> pca = PcaTarget{};  // nullopt disables PCA
  bool l2_normalize = false;                   // unit-normalize raw samples first

  static PreprocessConfig none() { return PreprocessConfig{false, std::nullopt, false}; }
  static PreprocessConfig center_only() { return PreprocessConfig{true, std::nullopt, false}; }
};

inline Matrix l2_normalize_columns(const Matrix& x) {
  Matrix out = x;
  for (Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (norm > 0.0) out.col(j) /= norm;
  }
  return out;
}

/// Fitted preprocessing for one modality: optional l2 normalization, then
/// either PCA (which centers) or plain centering, or nothing.
struct ModalityPreprocessor {
  Index input_dim = 0;
  bool l2_normalize = false;
  std::optional<Vector> mean;
  std::optional<PcaModel> pca;

  Matrix apply(const Matrix& x) const {
    require(x.rows() == input_dim, Errc::dimension_mismatch,
            "preprocess: expected " + std::to_string(input_dim) + " features, got " +
                std::to_string(x.rows()));
    const Matrix in = l2_normalize ? l2_normalize_columns(x) : x;
    if (pca) return pca_apply(*pca, in);
    if (mean) return in.colwise() - *mean;
    return in;
  }

  Index output_dim() const { return pca ? pca->k() : input_dim; }
};

inline ModalityPreprocessor fit_preprocessor(const Matrix& x, const PreprocessConfig& config) {
  ModalityPreprocessor p;
  p.input_dim = x.rows();
  p.l2_normalize = config.l2_normalize;
  const Matrix in = config.l2_normalize ? l2_normalize_columns(x) : x;
  if (config.pca) {
    PcaTarget target = *config.pca;
    // A fixed dimension larger than the data supports is clamped rather than rejected
    // so that one configuration works across split sizes.
    if (target.dim) target.dim = std::min<Index>(*target.dim, std::min(in.rows(), in.cols() - 1));
    p.pca = pca_fit(in, target);
  } else if (config.center) {
    p.mean = in.rowwise().mean();
  }
  return p;
}

}  // namespace xms
