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

#include "xms/model.hpp"
#include "xms/numerics.hpp"

namespace xms {

struct CcaConfig {
  Index dim = 30;
  std::optional<double> ridge;  // nullopt: default_ridge of the constraint matrix
};

struct CcaSolution {
  Vector correlations;  // non-increasing
  Matrix wa;            // canonical directions, unit variance each
  Matrix wb;
  double ridge = 0.0;
};

/// Canonical pairs straight from a covariance set, via the joint eigenproblem
/// [0 Sab; Sba 0] v = rho [Saa 0; 0 Sbb] v.
inline CcaSolution cca_from_covariances(const CovarianceSet& cov, Index dim,
                                        std::optional<double> ridge = std::nullopt) {
  const Index da = cov.saa.rows();
  const Index db = cov.sbb.rows();
  require(cov.sab.rows() == da && cov.sab.cols() == db, Errc::dimension_mismatch,
          "cca: cross-covariance shape");
  require(dim >= 1 && dim <= std::min(da, db), Errc::invalid_argument,
          "cca: dimension " + std::to_string(dim) + " exceeds min(d_a, d_b)");
  Matrix a = Matrix::Zero(da + db, da + db);
  a.topRightCorner(da, db) = cov.sab;
  a.bottomLeftCorner(db, da) = cov.sab.transpose();
  Matrix b = Matrix::Zero(da + db, da + db);
  b.topLeftCorner(da, da) = cov.saa;
  b.bottomRightCorner(db, db) = cov.sbb;
  const double r = ridge.value_or(default_ridge(b));
  const GevResult gev = solve_gev(a, b, dim, r);
  CcaSolution out;
  out.correlations = gev.values;
  // Each half carries v^T B v = 1/2 at a stationary point; rescale to unit variance.
  out.wa = std::sqrt(2.0) * gev.vectors.topRows(da);
  out.wb = std::sqrt(2.0) * gev.vectors.bottomRows(db);
  out.ridge = r;
  return out;
}

inline Projections fit_cca(const TrainingSet& train, const CcaConfig& config) {
  require(config.dim <= train.size() - 1, Errc::invalid_argument,
          "cca: dimension exceeds n - 1");
  const CcaSolution s = cca_from_covariances(covariances(train.xa, train.xb), config.dim, config.ridge);
  Projections p;
  p.wa = s.wa;
  p.wb = s.wb;
  p.eigenvalues = s.correlations;
  p.hyperparams = {{"dim", static_cast<double>(config.dim)}, {"ridge", s.ridge}};
  for (Index j = 0; j < s.correlations.size(); ++j)
    p.hyperparams["correlation_" + std::to_string(j + 1)] = s.correlations(j);
  return p;
}

// ---------------------------------------------------------------------------
// Three-view CCA with the one-hot label matrix as the third view.

struct Cca3vConfig {
  Index dim = 2;
  std::optional<double> ridge;
};

/// Block matrices of the three-view problem: the pairwise-distance objective
/// sum_{p<q} |X_p^T W_p - X_q^T W_q|_F^2 equals (n-1) tr(W^T L W) with
/// L = [2S_aa -S_ab -S_ac; ...], constrained by W^T diag(S_vv) W = I.
struct ThreeViewProblem {
  Matrix objective;   // L
  Matrix constraint;  // blockdiag(S_aa, S_bb, S_cc)
  Index da = 0, db = 0, dc = 0;
  double scale = 1.0;  // n - 1
};

inline ThreeViewProblem three_view_problem(const Matrix& xa, const Matrix& xb, const Matrix& xc) {
  const Index n = xa.cols();
  require(n >= 2 && xb.cols() == n && xc.cols() == n, Errc::pair_count_mismatch,
          "cca3v: view sample counts differ");
  ThreeViewProblem prob;
  prob.da = xa.rows();
  prob.db = xb.rows();
  prob.dc = xc.rows();
  prob.scale = static_cast<double>(n - 1);
  const Index total = prob.da + prob.db + prob.dc;
  Matrix stacked(total, n);
  stacked << xa, xb, xc;
  const Matrix sigma = stacked * stacked.transpose() / prob.scale;
  const Index offsets[3] = {0, prob.da, prob.da + prob.db};
  const Index sizes[3] = {prob.da, prob.db, prob.dc};
  prob.objective = -sigma;
  prob.constraint = Matrix::Zero(total, total);
  for (int v = 0; v < 3; ++v) {
    const auto blk = sigma.block(offsets[v], offsets[v], sizes[v], sizes[v]);
    prob.objective.block(offsets[v], offsets[v], sizes[v], sizes[v]) = 2.0 * blk;
    prob.constraint.block(offsets[v], offsets[v], sizes[v], sizes[v]) = blk;
  }
  return prob;
}

/// Value of the three-view distance objective at the given view projections.
inline double three_view_objective(const Matrix& xa, const Matrix& xb, const Matrix& xc,
                                   const Matrix& wa, const Matrix& wb, const Matrix& wc) {
  const Matrix fa = xa.transpose() * wa;
  const Matrix fb = xb.transpose() * wb;
  const Matrix fc = xc.transpose() * wc;
  return (fa - fb).squaredNorm() + (fa - fc).squaredNorm() + (fb - fc).squaredNorm();
}

/// Uncentered one-hot label view, c x n.
inline Matrix label_view(const TrainingSet& train) {
  return encode_labels(train.labels, train.classes).transpose();
}

inline Projections fit_cca3v(const TrainingSet& train, const Cca3vConfig& config) {
  const Matrix xc = label_view(train);
  const ThreeViewProblem prob = three_view_problem(train.xa, train.xb, xc);
  require(config.dim >= 1 && config.dim <= std::min(prob.da, prob.db), Errc::invalid_argument,
          "cca3v: dimension exceeds min(d_a, d_b)");
  const double ridge = config.ridge.value_or(default_ridge(prob.constraint));
  // Smallest eigenpairs of (L, B) are the largest of (-L, B).
  const GevResult gev = solve_gev(-prob.objective, prob.constraint, config.dim, ridge);
  Projections p;
  p.wa = gev.vectors.topRows(prob.da);
  p.wb = gev.vectors.middleRows(prob.da, prob.db);
  p.aux["wc"] = gev.vectors.bottomRows(prob.dc);
  p.eigenvalues = gev.values;
  p.hyperparams = {{"dim", static_cast<double>(config.dim)},
                   {"ridge", ridge},
                   {"objective", three_view_objective(train.xa, train.xb, xc, p.wa, p.wb, p.aux["wc"])}};
  return p;
}

}  // namespace xms
