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

#include <cmath>
#include <string>

#include "xms/model.hpp"
#include "xms/numerics.hpp"

namespace xms {

/// Shared configuration of the label-regression fitters (LCFS and JFSSL).
struct SparseCoupledConfig {
  double lambda1 = 0.1;  // l2,1 row sparsity
  double lambda2 = 0.1;  // trace norm (LCFS) or multimodal graph (JFSSL)
  int max_iters = 200;
  double tol = 1e-6;     // relative objective decrease
  Index graph_k = 5;
  double eps = 1e-6;     // l2,1 clamp and trace-norm smoothing
  double ridge = 0.0;    // optional Tikhonov term (ridge/2)|W|^2 (LCFS), ridge |W|^2 (JFSSL)
};

namespace detail {

inline void validate(const SparseCoupledConfig& c, const char* who) {
  require(c.lambda1 >= 0 && c.lambda2 >= 0, Errc::invalid_argument,
          std::string(who) + ": lambda1 and lambda2 must be non-negative");
  require(c.max_iters >= 1 && c.tol > 0 && c.eps > 0 && c.ridge >= 0, Errc::invalid_argument,
          std::string(who) + ": need max_iters >= 1, tol > 0, eps > 0, ridge >= 0");
}

// Cholesky solve that reports singular systems instead of returning garbage.
inline Matrix spd_solve(const Matrix& system, const Matrix& rhs, const char* who) {
  Eigen::LLT<Matrix> llt(0.5 * (system + system.transpose()));
  if (llt.info() != Eigen::Success)
    fail(Errc::singular_matrix,
         std::string(who) + ": system matrix is singular; use lambda1 > 0 or a positive ridge");
  const double diag_min = llt.matrixLLT().diagonal().minCoeff();
  const double diag_max = llt.matrixLLT().diagonal().maxCoeff();
  if (!(diag_min > 0) || (diag_max / diag_min) * (diag_max / diag_min) > kMaxConditionNumber)
    fail(Errc::singular_matrix,
         std::string(who) + ": system matrix is ill-conditioned; use lambda1 > 0 or a positive ridge");
  return llt.solve(rhs);
}

inline Matrix warm_start(const Matrix& x, const Matrix& y, double ridge) {
  Matrix gram = x * x.transpose();
  gram.diagonal().array() += std::max(ridge, default_ridge(gram));
  Eigen::LDLT<Matrix> ldlt(gram);
  return ldlt.solve(x * y);
}

inline bool converged(double previous, double current, double tol) {
  return previous - current <= tol * std::max(std::abs(previous), 1e-300);
}

}  // namespace detail

/// Smoothed LCFS objective: 1/2 (|X_a^T W_a - Y|^2 + |X_b^T W_b - Y|^2)
/// + lambda1 (l21_eps(W_a) + l21_eps(W_b)) + lambda2 tr((Z^T Z + eps I)^{1/2})
/// + ridge/2 (|W_a|^2 + |W_b|^2), Z = [X_a^T W_a, X_b^T W_b].
inline double lcfs_objective(const Matrix& xa, const Matrix& xb, const Matrix& y, const Matrix& wa,
                             const Matrix& wb, const SparseCoupledConfig& c) {
  const Matrix za = xa.transpose() * wa;
  const Matrix zb = xb.transpose() * wb;
  double f = 0.5 * ((za - y).squaredNorm() + (zb - y).squaredNorm());
  f += c.lambda1 * (l21_norm_smoothed(wa, c.eps) + l21_norm_smoothed(wb, c.eps));
  if (c.lambda2 > 0) {
    Matrix z(za.rows(), za.cols() + zb.cols());
    z << za, zb;
    f += c.lambda2 * trace_norm_majorizer(z, c.eps).value;
  }
  f += 0.5 * c.ridge * (wa.squaredNorm() + wb.squaredNorm());
  return f;
}

/// Coupled label regression with l2,1 feature selection and a trace-norm
/// coupling of the two projected blocks. Majorize-minimize: the l2,1 terms use
/// the clamped reweighting diagonals and the trace norm its variational bound
/// with weight G = (Z^T Z + eps I)^{-1/2}; each block update solves
///   X X^T W (I + lambda2 G_pp) + (2 lambda1 D + ridge I) W = X Y - lambda2 X Z_q G_qp
/// exactly, column-by-column in the eigenbasis of G_pp.
inline Projections fit_lcfs(const TrainingSet& train, const SparseCoupledConfig& config) {
  detail::validate(config, "lcfs");
  const Matrix& xa = train.xa;
  const Matrix& xb = train.xb;
  const Matrix y = encode_labels(train.labels, train.classes);
  const Index c = y.cols();
  const Matrix gram_a = xa * xa.transpose();
  const Matrix gram_b = xb * xb.transpose();
  const Matrix xya = xa * y;
  const Matrix xyb = xb * y;

  Matrix wa = detail::warm_start(xa, y, config.ridge);
  Matrix wb = detail::warm_start(xb, y, config.ridge);

  // Solves the block update for one modality with the other fixed.
  auto update = [&](const Matrix& gram, const Matrix& xy, const Matrix& x, const Matrix& w,
                    const Matrix& other_z, const Matrix& g_self, const Matrix& g_cross) {
    const Vector dvec = l21_reweight(w, config.eps);
    Matrix rhs = xy;
    if (config.lambda2 > 0) rhs -= config.lambda2 * x * (other_z * g_cross);
    Matrix basis = Matrix::Identity(c, c);
    Vector gamma = Vector::Zero(c);
    if (config.lambda2 > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(g_self);
      basis = eig.eigenvectors();
      gamma = eig.eigenvalues();
    }
    const Matrix rhs_rot = rhs * basis;
    Matrix w_rot(w.rows(), c);
    for (Index k = 0; k < c; ++k) {
      Matrix system = (1.0 + config.lambda2 * gamma(k)) * gram;
      system.diagonal() += 2.0 * config.lambda1 * dvec;
      system.diagonal().array() += config.ridge;
      w_rot.col(k) = detail::spd_solve(system, rhs_rot.col(k), "lcfs");
    }
    return Matrix(w_rot * basis.transpose());
  };

  Projections p;
  p.objective_trace.push_back(lcfs_objective(xa, xb, y, wa, wb, config));
  bool done = false;
  int iters = 0;
  for (; iters < config.max_iters && !done;) {
    Matrix g = Matrix::Zero(2 * c, 2 * c);
    if (config.lambda2 > 0) {
      Matrix z(xa.cols(), 2 * c);
      z << xa.transpose() * wa, xb.transpose() * wb;
      g = trace_norm_majorizer(z, config.eps).weight;
    }
    // The l2,1 weights are taken at the start of the sweep for both blocks.
    const Matrix wb_start = wb;
    {
      const Matrix zb = xb.transpose() * wb;
      wa = update(gram_a, xya, xa, wa, zb, g.topLeftCorner(c, c), g.bottomLeftCorner(c, c));
    }
    {
      const Matrix za = xa.transpose() * wa;
      wb = update(gram_b, xyb, xb, wb_start, za, g.bottomRightCorner(c, c), g.topRightCorner(c, c));
    }
    ++iters;
    const double f = lcfs_objective(xa, xb, y, wa, wb, config);
    if (!std::isfinite(f))
      fail(Errc::divergence, "lcfs: objective became non-finite at iteration " + std::to_string(iters));
    done = detail::converged(p.objective_trace.back(), f, config.tol);
    p.objective_trace.push_back(f);
  }
  p.wa = std::move(wa);
  p.wb = std::move(wb);
  p.hyperparams = {{"lambda1", config.lambda1}, {"lambda2", config.lambda2},
                   {"eps", config.eps},         {"ridge", config.ridge},
                   {"dim", static_cast<double>(c)}, {"iterations", static_cast<double>(iters)},
                   {"converged", done ? 1.0 : 0.0}};
  return p;
}

/// JFSSL objective for two modalities: sum_p |X_p^T W_p - Y|^2
/// + lambda1 sum_p l21_eps(W_p) + lambda2 tr(F^T L F) + ridge sum_p |W_p|^2,
/// F = [X_a^T W_a; X_b^T W_b] and L the multimodal graph Laplacian.
inline double jfssl_objective(const Matrix& xa, const Matrix& xb, const Matrix& y, const Matrix& wa,
                              const Matrix& wb, const Matrix& laplacian,
                              const SparseCoupledConfig& c) {
  const Matrix za = xa.transpose() * wa;
  const Matrix zb = xb.transpose() * wb;
  double f = (za - y).squaredNorm() + (zb - y).squaredNorm();
  f += c.lambda1 * (l21_norm_smoothed(wa, c.eps) + l21_norm_smoothed(wb, c.eps));
  if (c.lambda2 > 0) {
    Matrix stacked(za.rows() + zb.rows(), za.cols());
    stacked << za, zb;
    f += c.lambda2 * (stacked.transpose() * laplacian * stacked).trace();
  }
  f += c.ridge * (wa.squaredNorm() + wb.squaredNorm());
  return f;
}

/// Label regression with l2,1 feature selection and multimodal graph
/// regularization. Alternates exact block solves of
///   (X_p X_p^T + lambda1 D_p + lambda2 X_p L_pp X_p^T) W_p = X_p Y - lambda2 X_p L_pq X_q^T W_q.
inline Projections fit_jfssl(const TrainingSet& train, const SparseCoupledConfig& config) {
  detail::validate(config, "jfssl");
  const Matrix& xa = train.xa;
  const Matrix& xb = train.xb;
  const Index n = train.size();
  const Matrix y = encode_labels(train.labels, train.classes);
  const Matrix laplacian =
      config.lambda2 > 0 ? multimodal_graph(xa, xb, train.labels, config.graph_k).laplacian
                         : Matrix::Zero(2 * n, 2 * n);
  Matrix base_a = xa * xa.transpose();
  Matrix base_b = xb * xb.transpose();
  Matrix couple_ab, couple_ba;  // X_a L_ab X_b^T and its transpose
  if (config.lambda2 > 0) {
    base_a += config.lambda2 * xa * laplacian.topLeftCorner(n, n) * xa.transpose();
    base_b += config.lambda2 * xb * laplacian.bottomRightCorner(n, n) * xb.transpose();
    couple_ab = xa * laplacian.topRightCorner(n, n) * xb.transpose();
    couple_ba = couple_ab.transpose();
  }
  base_a.diagonal().array() += config.ridge;
  base_b.diagonal().array() += config.ridge;
  const Matrix xya = xa * y;
  const Matrix xyb = xb * y;

  Matrix wa = detail::warm_start(xa, y, config.ridge);
  Matrix wb = detail::warm_start(xb, y, config.ridge);

  auto update = [&](const Matrix& base, const Matrix& xy, const Matrix& w, const Matrix& couple,
                    const Matrix& w_other) {
    Matrix system = base;
    system.diagonal() += config.lambda1 * l21_reweight(w, config.eps);
    Matrix rhs = xy;
    if (config.lambda2 > 0) rhs -= config.lambda2 * couple * w_other;
    return detail::spd_solve(system, rhs, "jfssl");
  };

  Projections p;
  p.objective_trace.push_back(jfssl_objective(xa, xb, y, wa, wb, laplacian, config));
  bool done = false;
  int iters = 0;
  for (; iters < config.max_iters && !done;) {
    wa = update(base_a, xya, wa, couple_ab, wb);
    wb = update(base_b, xyb, wb, couple_ba, wa);
    ++iters;
    const double f = jfssl_objective(xa, xb, y, wa, wb, laplacian, config);
    if (!std::isfinite(f))
      fail(Errc::divergence, "jfssl: objective became non-finite at iteration " + std::to_string(iters));
    done = detail::converged(p.objective_trace.back(), f, config.tol);
    p.objective_trace.push_back(f);
  }
  p.wa = std::move(wa);
  p.wb = std::move(wb);
  p.hyperparams = {{"lambda1", config.lambda1}, {"lambda2", config.lambda2},
                   {"eps", config.eps},         {"ridge", config.ridge},
                   {"graph_k", static_cast<double>(config.graph_k)},
                   {"dim", static_cast<double>(train.classes)},
                   {"iterations", static_cast<double>(iters)},
                   {"converged", done ? 1.0 : 0.0}};
  return p;
}

}  // namespace xms
