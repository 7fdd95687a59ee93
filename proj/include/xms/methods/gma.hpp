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

enum class GmaVariant { blm, gmlda, gmmfa };

struct GmaConfig {
  GmaVariant variant = GmaVariant::gmlda;
  double mu = 1.0;
  double beta = 1.0;
  double alpha = 1.0;
  Index mfa_k_intrinsic = 5;
  Index mfa_k_penalty = 20;
  Index dim = 2;
  std::optional<double> ridge;
};

/// Per-view matrices substituted into the generalized multi-view objective
///   max w_a^T A_a w_a + mu w_b^T A_b w_b + beta w_a^T C w_b
///   s.t. w_a^T B_a w_a + alpha w_b^T B_b w_b = 1.
struct GmaBlocks {
  Matrix aa, ab;  // A_a, A_b
  Matrix ba, bb;  // B_a, B_b
  Matrix cross;   // C, d_a x d_b
};

/// BLM:   A = X X^T / n, B = I, C = X_a X_b^T / n.
/// GMLDA: A = S^B, B = S^W, C = M_a N M_b^T (class means, class-size weighted).
/// GMMFA: A = X L_p X^T, B = X L_i X^T over penalty / intrinsic graphs, and C the
///        raw X_a X_b^T scaled by tr(A_a + A_b) / tr(X_a X_a^T + X_b X_b^T).
inline GmaBlocks gma_blocks(const TrainingSet& train, const GmaConfig& config) {
  const Matrix& xa = train.xa;
  const Matrix& xb = train.xb;
  const double n = static_cast<double>(train.size());
  GmaBlocks g;
  switch (config.variant) {
    case GmaVariant::blm:
      g.aa = xa * xa.transpose() / n;
      g.ab = xb * xb.transpose() / n;
      g.ba = Matrix::Identity(xa.rows(), xa.rows());
      g.bb = Matrix::Identity(xb.rows(), xb.rows());
      g.cross = xa * xb.transpose() / n;
      break;
    case GmaVariant::gmlda: {
      const ScatterSet sa = scatter(xa, train.labels, train.classes);
      const ScatterSet sb = scatter(xb, train.labels, train.classes);
      g.aa = sa.between;
      g.ab = sb.between;
      g.ba = sa.within;
      g.bb = sb.within;
      Vector counts = Vector::Zero(train.classes);
      for (int label : train.labels) counts(label - 1) += 1.0;
      const Matrix ma = sa.class_means.colwise() - xa.rowwise().mean();
      const Matrix mb = sb.class_means.colwise() - xb.rowwise().mean();
      g.cross = ma * counts.asDiagonal() * mb.transpose();
      break;
    }
    case GmaVariant::gmmfa: {
      const Matrix la_p = penalty_graph(xa, train.labels, config.mfa_k_penalty).laplacian;
      const Matrix la_i = intrinsic_graph(xa, train.labels, config.mfa_k_intrinsic).laplacian;
      const Matrix lb_p = penalty_graph(xb, train.labels, config.mfa_k_penalty).laplacian;
      const Matrix lb_i = intrinsic_graph(xb, train.labels, config.mfa_k_intrinsic).laplacian;
      g.aa = xa * la_p * xa.transpose();
      g.ab = xb * lb_p * xb.transpose();
      g.ba = xa * la_i * xa.transpose();
      g.bb = xb * lb_i * xb.transpose();
      const double raw = xa.squaredNorm() + xb.squaredNorm();
      const double scale = raw > 0 ? (g.aa.trace() + g.ab.trace()) / raw : 1.0;
      g.cross = scale * xa * xb.transpose();
      break;
    }
  }
  return g;
}

inline Projections fit_gma(const TrainingSet& train, const GmaConfig& config) {
  require(config.mu > 0 && config.alpha > 0 && config.beta >= 0, Errc::invalid_argument,
          "gma: need mu > 0, alpha > 0, beta >= 0");
  const Index da = train.xa.rows();
  const Index db = train.xb.rows();
  require(config.dim >= 1 && config.dim <= da + db, Errc::invalid_argument,
          "gma: dimension exceeds d_a + d_b");
  const GmaBlocks g = gma_blocks(train, config);
  Matrix a = Matrix::Zero(da + db, da + db);
  a.topLeftCorner(da, da) = g.aa;
  a.bottomRightCorner(db, db) = config.mu * g.ab;
  a.topRightCorner(da, db) = 0.5 * config.beta * g.cross;
  a.bottomLeftCorner(db, da) = 0.5 * config.beta * g.cross.transpose();
  a = (0.5 * (a + a.transpose())).eval();
  Matrix b = Matrix::Zero(da + db, da + db);
  b.topLeftCorner(da, da) = g.ba;
  b.bottomRightCorner(db, db) = config.alpha * g.bb;
  b = (0.5 * (b + b.transpose())).eval();
  const double ridge = config.ridge.value_or(default_ridge(b));
  const GevResult gev = solve_gev(a, b, config.dim, ridge);
  Projections p;
  p.wa = gev.vectors.topRows(da);
  p.wb = gev.vectors.bottomRows(db);
  p.eigenvalues = gev.values;
  p.hyperparams = {{"dim", static_cast<double>(config.dim)},
                   {"mu", config.mu},
                   {"beta", config.beta},
                   {"alpha", config.alpha},
                   {"ridge", ridge}};
  if (config.variant == GmaVariant::gmmfa) {
    p.hyperparams["k_intrinsic"] = static_cast<double>(config.mfa_k_intrinsic);
    p.hyperparams["k_penalty"] = static_cast<double>(config.mfa_k_penalty);
  }
  return p;
}

}  // namespace xms
