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

#include <random>

#include "xms/model.hpp"
#include "xms/numerics.hpp"

namespace xms {

struct CdfeConfig {
  double alpha = 0.5;  // inter-class dispersion weight
  double beta = 0.1;   // local consistency weight
  Index knn_k = 5;
  Index dim = 2;
  int max_iters = 1000;
  double tol = 1e-10;  // residual norm relative to |Q|
};

/// Quadratic form Q over stacked projections v = [w_a; w_b] such that
///   v^T Q v = J_intraclass - alpha J_interclass + beta J_local
/// for a single direction. Pair sums use the cross-modal indicator matrix S:
///   sum_ij S_ij (w_a^T x^a_i - w_b^T x^b_j)^2 = v^T M(S) v,
///   M(S) = [X_a D_r X_a^T, -X_a S X_b^T; -X_b S^T X_a^T, X_b D_c X_b^T].
/// J_local is each modality's k-NN Laplacian smoothness, normalized by its
/// total affinity.
struct CdfeProblem {
  Matrix q;
  double n_same = 0.0;   // N1
  double n_diff = 0.0;   // N2
};

inline Matrix cross_pair_form(const Matrix& xa, const Matrix& xb, const Matrix& s) {
  const Index da = xa.rows();
  const Index db = xb.rows();
  Matrix m(da + db, da + db);
  const Vector rows = s.rowwise().sum();
  const Vector cols = s.colwise().sum().transpose();
  m.topLeftCorner(da, da) = xa * rows.asDiagonal() * xa.transpose();
  m.bottomRightCorner(db, db) = xb * cols.asDiagonal() * xb.transpose();
  const Matrix off = -(xa * s * xb.transpose());
  m.topRightCorner(da, db) = off;
  m.bottomLeftCorner(db, da) = off.transpose();
  return m;
}

inline CdfeProblem cdfe_problem(const TrainingSet& train, const CdfeConfig& config) {
  const Index n = train.size();
  const Index da = train.xa.rows();
  const Index db = train.xb.rows();
  Matrix same(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      same(i, j) = train.labels[static_cast<std::size_t>(i)] == train.labels[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  const Matrix diff = Matrix::Ones(n, n) - same;
  CdfeProblem prob;
  prob.n_same = same.sum();
  prob.n_diff = diff.sum();
  require(config.alpha == 0.0 || prob.n_diff > 0, Errc::invalid_argument,
          "cdfe: inter-class term needs at least two classes");
  prob.q = cross_pair_form(train.xa, train.xb, same) / prob.n_same;
  if (config.alpha != 0.0) prob.q -= config.alpha * cross_pair_form(train.xa, train.xb, diff) / prob.n_diff;
  if (config.beta != 0.0 && n >= 2) {
    const Index k = std::min(config.knn_k, n - 1);
    const GraphSpec ga = knn_graph(train.xa, k);
    const GraphSpec gb = knn_graph(train.xb, k);
    // sum_ij w_ij (f_i - f_j)^2 = 2 f^T L f
    const double wa_total = std::max(ga.affinity.sum(), 1e-300);
    const double wb_total = std::max(gb.affinity.sum(), 1e-300);
    prob.q.topLeftCorner(da, da) += config.beta * 2.0 * train.xa * ga.laplacian * train.xa.transpose() / wa_total;
    prob.q.bottomRightCorner(db, db) += config.beta * 2.0 * train.xb * gb.laplacian * train.xb.transpose() / wb_total;
  }
  prob.q = (0.5 * (prob.q + prob.q.transpose())).eval();
  return prob;
}

/// Direct pair-sum evaluation of J_intraclass - alpha J_interclass for one
/// direction pair; used to cross-check the assembled quadratic form.
inline double cdfe_separability(const TrainingSet& train, const Vector& wa, const Vector& wb,
                                double alpha) {
  const Vector fa = train.xa.transpose() * wa;
  const Vector fb = train.xb.transpose() * wb;
  double intra = 0.0, inter = 0.0, n1 = 0.0, n2 = 0.0;
  for (Index i = 0; i < fa.size(); ++i)
    for (Index j = 0; j < fb.size(); ++j) {
      const double d = fa(i) - fb(j);
      if (train.labels[static_cast<std::size_t>(i)] == train.labels[static_cast<std::size_t>(j)]) {
        intra += d * d;
        n1 += 1;
      } else {
        inter += d * d;
        n2 += 1;
      }
    }
  return intra / n1 - (n2 > 0 ? alpha * inter / n2 : 0.0);
}

struct TraceMinResult {
  Matrix vectors;   // orthonormal columns
  Vector values;    // Ritz values, ascending
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Orthonormal basis of span(fixed, extra) keeping the columns of `fixed`
// (already orthonormal) first and unchanged. Near-dependent directions are dropped.
inline Matrix extend_basis(const Matrix& fixed, const Matrix& extra) {
  Matrix e = extra;
  for (int pass = 0; pass < 2; ++pass) e -= fixed * (fixed.transpose() * e);
  if (e.cols() == 0) return fixed;
  const double scale = std::max(e.norm(), 1e-300);
  Eigen::JacobiSVD<Matrix> svd(e, Eigen::ComputeThinU);
  Index keep = 0;
  const auto& sv = svd.singularValues();
  while (keep < sv.size() && sv(keep) > 1e-10 * std::max(scale, sv(0))) ++keep;
  Matrix basis(fixed.rows(), fixed.cols() + keep);
  basis.leftCols(fixed.cols()) = fixed;
  if (keep > 0) {
    Matrix add = svd.matrixU().leftCols(keep);
    add -= fixed * (fixed.transpose() * add);
    Eigen::HouseholderQR<Matrix> qr(add);
    basis.rightCols(keep) = qr.householderQ() * Matrix::Identity(add.rows(), keep);
  }
  return basis;
}

}  // namespace detail

/// Minimizes tr(V^T Q V) over orthonormal n x d frames by block Rayleigh-Ritz on
/// span[V, residual, previous step]. The search space always contains V, so the
/// recorded trace never increases. The start frame comes from a fixed-seed generator.
inline TraceMinResult minimize_trace(const Matrix& q, Index d, int max_iters, double tol) {
  const Index n = q.rows();
  require(d >= 1 && d <= n, Errc::invalid_argument, "minimize_trace: bad subspace dimension");
  std::mt19937_64 rng(0x5eedcdfeULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix start(n, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < n; ++i) start(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(start);
  Matrix v = qr.householderQ() * Matrix::Identity(n, d);

  auto ritz = [&](const Matrix& basis, Matrix& vec, Vector& val) {
    const Matrix h = basis.transpose() * q * basis;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (h + h.transpose()));
    val = eig.eigenvalues().head(d);
    vec = basis * eig.eigenvectors().leftCols(d);
  };

  TraceMinResult out;
  Vector values;
  ritz(v, v, values);
  out.trace.push_back(values.sum());
  const double qnorm = std::max(q.norm(), 1e-300);
  Matrix step(n, 0);
  for (int it = 0; it < max_iters; ++it) {
    const Matrix residual = q * v - v * values.asDiagonal();
    if (residual.norm() <= tol * qnorm) {
      out.converged = true;
      break;
    }
    Matrix extra(n, residual.cols() + step.cols());
    extra << residual, step;
    const Matrix basis = detail::extend_basis(v, extra);
    Matrix v_next;
    Vector values_next;
    ritz(basis, v_next, values_next);
    ++out.iterations;
    if (values_next.sum() > out.trace.back()) {
      // Rounding-level increase: the frame is already optimal within precision.
      out.converged = true;
      break;
    }
    step = v_next - v * (v.transpose() * v_next);
    v = std::move(v_next);
    values = std::move(values_next);
    out.trace.push_back(values.sum());
  }
  out.vectors = std::move(v);
  out.values = std::move(values);
  return out;
}

inline Projections fit_cdfe(const TrainingSet& train, const CdfeConfig& config) {
  require(config.alpha >= 0 && config.beta >= 0, Errc::invalid_argument, "cdfe: alpha, beta must be >= 0");
  const Index da = train.xa.rows();
  const Index db = train.xb.rows();
  require(config.dim >= 1 && config.dim <= da + db, Errc::invalid_argument,
          "cdfe: dimension exceeds d_a + d_b");
  const CdfeProblem prob = cdfe_problem(train, config);
  require(is_symmetric(prob.q), Errc::internal, "cdfe: assembled quadratic form is not symmetric");
  TraceMinResult sol = minimize_trace(prob.q, config.dim, config.max_iters, config.tol);
  canonicalize_signs(sol.vectors);
  Projections p;
  p.wa = sol.vectors.topRows(da);
  p.wb = sol.vectors.bottomRows(db);
  p.eigenvalues = -sol.values;  // maximization form, non-increasing
  p.objective_trace = std::move(sol.trace);
  p.hyperparams = {{"dim", static_cast<double>(config.dim)},
                   {"alpha", config.alpha},
                   {"beta", config.beta},
                   {"knn_k", static_cast<double>(config.knn_k)},
                   {"iterations", static_cast<double>(sol.iterations)},
                   {"converged", sol.converged ? 1.0 : 0.0}};
  return p;
}

}  // namespace xms
