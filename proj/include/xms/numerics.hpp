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
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xms/dataset_io.hpp"
#include "xms/error.hpp"

namespace xms {

// ---------------------------------------------------------------------------
// Covariances and scatter

struct CovarianceSet {
  Matrix saa;
  Matrix sbb;
  Matrix sab;  // = sba^T
};

/// Empirical (1/(n-1)) covariances of two centered modalities.
inline CovarianceSet covariances(const Matrix& xa, const Matrix& xb) {
  require(xa.cols() == xb.cols(), Errc::pair_count_mismatch, "covariances: sample counts differ");
  require(xa.cols() >= 2, Errc::invalid_argument, "covariances: need at least two samples");
  const double scale = 1.0 / static_cast<double>(xa.cols() - 1);
  CovarianceSet cov;
  cov.saa = scale * xa * xa.transpose();
  cov.sbb = scale * xb * xb.transpose();
  cov.sab = scale * xa * xb.transpose();
  return cov;
}

struct ScatterSet {
  Matrix within;
  Matrix between;
  Matrix class_means;  // d x c
};

/// Class-size weighted within/between scatter (unnormalized sums). Labels are 1-based.
inline ScatterSet scatter(const Matrix& x, std::span<const int> labels, int classes) {
  require(static_cast<Index>(labels.size()) == x.cols(), Errc::pair_count_mismatch,
          "scatter: label count differs from sample count");
  const Index d = x.rows();
  std::vector<Index> counts(static_cast<std::size_t>(classes), 0);
  ScatterSet s;
  s.class_means = Matrix::Zero(d, classes);
  for (Index i = 0; i < x.cols(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    require(label >= 1 && label <= classes, Errc::label_out_of_range, "scatter: label out of range");
    s.class_means.col(label - 1) += x.col(i);
    ++counts[static_cast<std::size_t>(label - 1)];
  }
  for (int k = 0; k < classes; ++k) {
    require(counts[static_cast<std::size_t>(k)] > 0, Errc::empty_class,
            "scatter: class " + std::to_string(k + 1) + " has no samples");
    s.class_means.col(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
  }
  const Vector mean = x.rowwise().mean();
  Matrix centered_within(d, x.cols());
  for (Index i = 0; i < x.cols(); ++i)
    centered_within.col(i) = x.col(i) - s.class_means.col(labels[static_cast<std::size_t>(i)] - 1);
  s.within = centered_within * centered_within.transpose();
  Matrix weighted(d, classes);
  for (int k = 0; k < classes; ++k)
    weighted.col(k) = std::sqrt(static_cast<double>(counts[static_cast<std::size_t>(k)])) *
                      (s.class_means.col(k) - mean);
  s.between = weighted * weighted.transpose();
  return s;
}

// ---------------------------------------------------------------------------
// Generalized eigenproblems

/// Flips each column so that its largest-magnitude entry is positive
/// (first such entry on ties).
inline void canonicalize_signs(Matrix& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index best = 0;
    for (Index i = 1; i < vectors.rows(); ++i)
      if (std::abs(vectors(i, j)) > std::abs(vectors(best, j))) best = i;
    if (vectors.rows() > 0 && vectors(best, j) < 0) vectors.col(j) *= -1.0;
  }
}

inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Default ridge: 1e-4 * trace(B) / size(B).
inline double default_ridge(const Matrix& b) {
  return b.rows() == 0 ? 0.0 : 1e-4 * b.trace() / static_cast<double>(b.rows());
}

struct GevResult {
  Vector values;   // non-increasing
  Matrix vectors;  // columns v with v^T (B + ridge I) v = 1
};

inline constexpr double kMaxConditionNumber = 1e12;

/// k largest eigenpairs of A v = lambda (B + ridge I) v for symmetric A and
/// symmetric positive definite B + ridge I. B is whitened through its own
/// eigendecomposition, which also yields the condition estimate.
inline GevResult solve_gev(const Matrix& a, const Matrix& b, Index k, double ridge) {
  require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
          Errc::dimension_mismatch, "solve_gev: A and B must be square and the same size");
  require(k >= 1 && k <= a.rows(), Errc::invalid_argument,
          "solve_gev: requested " + std::to_string(k) + " eigenpairs of a size-" +
              std::to_string(a.rows()) + " problem");
  require(ridge >= 0.0, Errc::invalid_argument, "solve_gev: ridge must be non-negative");
  require(is_symmetric(a, 1e-9), Errc::internal, "solve_gev: A is not symmetric");
  require(is_symmetric(b, 1e-9), Errc::internal, "solve_gev: B is not symmetric");

  const Index n = a.rows();
  Matrix breg = 0.5 * (b + b.transpose());
  breg.diagonal().array() += ridge;
  Eigen::SelfAdjointEigenSolver<Matrix> beig(breg);
  require(beig.info() == Eigen::Success, Errc::singular_matrix, "solve_gev: eigensolver failed on B");
  const Vector& bvals = beig.eigenvalues();
  const double bmax = bvals(n - 1);
  const double bmin = bvals(0);
  if (!(bmin > 0.0) || bmax / bmin > kMaxConditionNumber)
    fail(Errc::singular_matrix,
         "B + ridge*I is numerically singular (eigenvalues in [" + std::to_string(bmin) + ", " +
             std::to_string(bmax) + "]); use a larger ridge");

  const Matrix whiten = beig.eigenvectors() * bvals.cwiseSqrt().cwiseInverse().asDiagonal();
  Matrix c = whiten.transpose() * (0.5 * (a + a.transpose())) * whiten;
  c = (0.5 * (c + c.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> ceig(c);
  require(ceig.info() == Eigen::Success, Errc::singular_matrix, "solve_gev: eigensolver failed");

  GevResult result;
  result.values.resize(k);
  result.vectors.resize(n, k);
  for (Index j = 0; j < k; ++j) {
    result.values(j) = ceig.eigenvalues()(n - 1 - j);
    result.vectors.col(j) = whiten * ceig.eigenvectors().col(n - 1 - j);
  }
  canonicalize_signs(result.vectors);
  return result;
}

// ---------------------------------------------------------------------------
// Graphs

enum class GraphKind { intra_modality_knn, same_class_intrinsic, diff_class_penalty, multimodal_block };

struct GraphSpec {
  Matrix affinity;
  Matrix laplacian;
  GraphKind kind = GraphKind::intra_modality_knn;
};

inline Matrix laplacian_of(const Matrix& affinity) {
  Matrix l = -affinity;
  l.diagonal() += affinity.rowwise().sum();
  return l;
}

inline Matrix squared_distances(const Matrix& x) {
  const Vector norms = x.colwise().squaredNorm().transpose();
  Matrix d2 = (-2.0 * x.transpose() * x).colwise() + norms;
  d2.rowwise() += norms.transpose();
  d2 = d2.cwiseMax(0.0);
  d2.diagonal().setZero();
  return d2;
}

namespace detail {

// Indices of the k nearest candidates to i (excluding i), ties by index.
inline std::vector<Index> nearest(const Matrix& d2, Index i, Index k,
                                  const std::vector<Index>& candidates) {
  std::vector<Index> pool;
  pool.reserve(candidates.size());
  for (Index j : candidates)
    if (j != i) pool.push_back(j);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end(),
                    [&](Index p, Index q) {
                      return d2(i, p) < d2(i, q) || (d2(i, p) == d2(i, q) && p < q);
                    });
  pool.resize(take);
  return pool;
}

inline std::vector<std::vector<Index>> knn_lists(const Matrix& d2, Index k) {
  std::vector<Index> all(static_cast<std::size_t>(d2.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  std::vector<std::vector<Index>> lists;
  lists.reserve(all.size());
  for (Index i = 0; i < d2.rows(); ++i) lists.push_back(nearest(d2, i, k, all));
  return lists;
}

inline double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

inline GraphSpec make_graph(Matrix affinity, GraphKind kind) {
  affinity = affinity.cwiseMax(affinity.transpose()).eval();
  affinity.diagonal().setZero();
  GraphSpec g;
  g.laplacian = laplacian_of(affinity);
  g.affinity = std::move(affinity);
  g.kind = kind;
  return g;
}

}  // namespace detail

/// Symmetrized k-nearest-neighbour heat-kernel graph over the columns of x,
/// w_ij = exp(-|x_i - x_j|^2 / sigma^2). Without an explicit bandwidth sigma is
/// the median k-NN distance.
inline GraphSpec knn_graph(const Matrix& x, Index k, std::optional<double> bandwidth = std::nullopt) {
  require(k > 0, Errc::invalid_argument, "knn_graph: k must be positive");
  require(k < x.cols(), Errc::invalid_argument, "knn_graph: k must be smaller than the sample count");
  const Matrix d2 = squared_distances(x);
  const auto lists = detail::knn_lists(d2, k);
  double sigma = 0.0;
  if (bandwidth) {
    require(*bandwidth > 0.0, Errc::invalid_argument, "knn_graph: bandwidth must be positive");
    sigma = *bandwidth;
  } else {
    std::vector<double> dists;
    for (Index i = 0; i < x.cols(); ++i)
      for (Index j : lists[static_cast<std::size_t>(i)]) dists.push_back(std::sqrt(d2(i, j)));
    sigma = detail::median(dists);
    if (!(sigma > 0.0)) {
      // Duplicate points: fall back to the largest neighbour distance, then unit scale.
      sigma = dists.empty() ? 1.0 : *std::max_element(dists.begin(), dists.end());
      if (!(sigma > 0.0)) sigma = 1.0;
    }
  }
  Matrix w = Matrix::Zero(x.cols(), x.cols());
  for (Index i = 0; i < x.cols(); ++i)
    for (Index j : lists[static_cast<std::size_t>(i)]) w(i, j) = std::exp(-d2(i, j) / (sigma * sigma));
  return detail::make_graph(std::move(w), GraphKind::intra_modality_knn);
}

/// Binary graph linking each sample to its k nearest same-class neighbours.
inline GraphSpec intrinsic_graph(const Matrix& x, std::span<const int> labels, Index k) {
  require(k > 0, Errc::invalid_argument, "intrinsic_graph: k must be positive");
  const Matrix d2 = squared_distances(x);
  Matrix w = Matrix::Zero(x.cols(), x.cols());
  for (Index i = 0; i < x.cols(); ++i) {
    std::vector<Index> same;
    for (Index j = 0; j < x.cols(); ++j)
      if (labels[static_cast<std::size_t>(j)] == labels[static_cast<std::size_t>(i)]) same.push_back(j);
    for (Index j : detail::nearest(d2, i, k, same)) w(i, j) = 1.0;
  }
  return detail::make_graph(std::move(w), GraphKind::same_class_intrinsic);
}

/// Binary graph linking each sample to its k nearest samples of other classes.
inline GraphSpec penalty_graph(const Matrix& x, std::span<const int> labels, Index k) {
  require(k > 0, Errc::invalid_argument, "penalty_graph: k must be positive");
  const Matrix d2 = squared_distances(x);
  Matrix w = Matrix::Zero(x.cols(), x.cols());
  for (Index i = 0; i < x.cols(); ++i) {
    std::vector<Index> other;
    for (Index j = 0; j < x.cols(); ++j)
      if (labels[static_cast<std::size_t>(j)] != labels[static_cast<std::size_t>(i)]) other.push_back(j);
    for (Index j : detail::nearest(d2, i, k, other)) w(i, j) = 1.0;
  }
  return detail::make_graph(std::move(w), GraphKind::diff_class_penalty);
}

/// Joint 2n x 2n graph over [modality a samples; modality b samples].
/// Intra-modality blocks are heat-kernel k-NN graphs. The inter-modality block
/// links a_i and b_j with weight 1 when i == j (true pair) or when they share a
/// label and j is a k-NN of i (or i of j) in either modality.
inline GraphSpec multimodal_graph(const Matrix& xa, const Matrix& xb, std::span<const int> labels,
                                  Index k) {
  require(k > 0, Errc::invalid_argument, "multimodal_graph: k must be positive");
  require(xa.cols() == xb.cols() && static_cast<Index>(labels.size()) == xa.cols(),
          Errc::pair_count_mismatch, "multimodal_graph: sample counts differ");
  const Index n = xa.cols();
  Matrix w = Matrix::Zero(2 * n, 2 * n);
  if (n >= 2) {
    const Index kk = std::min(k, n - 1);
    w.topLeftCorner(n, n) = knn_graph(xa, kk).affinity;
    w.bottomRightCorner(n, n) = knn_graph(xb, kk).affinity;
    const auto la = detail::knn_lists(squared_distances(xa), kk);
    const auto lb = detail::knn_lists(squared_distances(xb), kk);
    Matrix neighbour = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j : la[static_cast<std::size_t>(i)]) neighbour(i, j) = 1.0;
      for (Index j : lb[static_cast<std::size_t>(i)]) neighbour(i, j) = 1.0;
    }
    neighbour = neighbour.cwiseMax(neighbour.transpose()).eval();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (neighbour(i, j) > 0 && labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)])
          w(i, n + j) = 1.0;
  }
  for (Index i = 0; i < n; ++i) w(i, n + i) = 1.0;
  w.bottomLeftCorner(n, n) = w.topRightCorner(n, n).transpose();
  return detail::make_graph(std::move(w), GraphKind::multimodal_block);
}

// ---------------------------------------------------------------------------
// Sparsity and low-rank operators

/// Diagonal of the l2,1 reweighting matrix: 1 / (2 max(|row_i(W)|, eps)).
inline Vector l21_reweight(const Matrix& w, double eps = 1e-6) {
  require(eps > 0.0, Errc::invalid_argument, "l21_reweight: eps must be positive");
  return (2.0 * w.rowwise().norm().array().max(eps)).inverse().matrix();
}

inline double l21_norm(const Matrix& w) { return w.rowwise().norm().sum(); }

/// l2,1 norm with rows below eps replaced by the quadratic s^2/(2 eps) + eps/2.
/// This is the function the clamped reweighting majorizes tightly, so iterative
/// solvers track it to get a monotone objective.
inline double l21_norm_smoothed(const Matrix& w, double eps) {
  double total = 0.0;
  for (Index i = 0; i < w.rows(); ++i) {
    const double s = w.row(i).norm();
    total += s >= eps ? s : s * s / (2.0 * eps) + 0.5 * eps;
  }
  return total;
}

/// Singular value soft-thresholding: U max(S - tau, 0) V^T.
inline Matrix singular_value_shrink(const Matrix& m, double tau) {
  require(tau >= 0.0, Errc::invalid_argument, "singular_value_shrink: tau must be non-negative");
  if (m.size() == 0) return m;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector shrunk = (svd.singularValues().array() - tau).max(0.0).matrix();
  return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

/// Smoothed trace norm tr((Z^T Z + eps I)^{1/2}) and its majorizer weight
/// (Z^T Z + eps I)^{-1/2}.
struct TraceNormMajorizer {
  double value = 0.0;
  Matrix weight;
};

inline TraceNormMajorizer trace_norm_majorizer(const Matrix& z, double eps) {
  Matrix gram = z.transpose() * z;
  gram.diagonal().array() += eps;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector roots = eig.eigenvalues().cwiseMax(eps).cwiseSqrt();
  TraceNormMajorizer out;
  out.value = roots.sum();
  out.weight = eig.eigenvectors() * roots.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return out;
}

}  // namespace xms
