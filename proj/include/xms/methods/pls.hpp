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

#include "xms/model.hpp"
#include "xms/numerics.hpp"

namespace xms {

struct PlsConfig {
  Index dim = 30;
  int max_power_iters = 5000;
  double power_tol = 1e-14;
};

/// Scores, loadings and inner relation of the fitted PLS model. Residual
/// blocks are not kept.
struct PlsDecomposition {
  Matrix scores_t;    // n x d
  Matrix scores_u;    // n x d
  Matrix loadings_p;  // d_a x d
  Matrix loadings_q;  // d_b x d
  Vector inner_d;     // diagonal of D in U = T D + H
};

namespace detail {

struct SingularPair {
  Vector u;
  Vector v;
  double sigma = 0.0;
};

// Leading singular pair of m by alternating power iteration (the NIPALS inner
// loop), with a dense SVD fallback when it stalls.
inline SingularPair leading_singular_pair(const Matrix& m, int max_iters, double tol) {
  SingularPair out;
  Index start = 0;
  m.colwise().squaredNorm().maxCoeff(&start);
  Vector v = Vector::Zero(m.cols());
  v(start) = 1.0;
  Vector u = m * v;
  if (u.norm() == 0.0) return out;
  u.normalize();
  bool converged = false;
  for (int it = 0; it < max_iters; ++it) {
    Vector v_next = m.transpose() * u;
    const double s = v_next.norm();
    if (s == 0.0) return out;
    v_next /= s;
    Vector u_next = m * v_next;
    u_next.normalize();
    const double change = (u_next - u).norm() + (v_next - v).norm();
    u = std::move(u_next);
    v = std::move(v_next);
    if (change < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU().col(0);
    v = svd.matrixV().col(0);
  }
  out.sigma = u.dot(m * v);
  if (out.sigma < 0) {
    v = -v;
    out.sigma = -out.sigma;
  }
  out.u = std::move(u);
  out.v = std::move(v);
  return out;
}

}  // namespace detail

/// Canonical-mode PLS: each weight pair maximizes cov(X_a^T w_a, X_b^T w_b)^2
/// under unit norms on the deflated residuals; both blocks are deflated by
/// their own scores, so successive weights are orthogonal.
inline Projections fit_pls(const TrainingSet& train, const PlsConfig& config,
                           PlsDecomposition* decomposition = nullptr) {
  const Index da = train.xa.rows();
  const Index db = train.xb.rows();
  const Index n = train.size();
  require(config.dim >= 1 && config.dim <= std::min(da, db), Errc::invalid_argument,
          "pls: dimension " + std::to_string(config.dim) + " exceeds min(d_a, d_b)");
  Matrix ea = train.xa;
  Matrix eb = train.xb;
  Projections p;
  p.wa.resize(da, config.dim);
  p.wb.resize(db, config.dim);
  PlsDecomposition dec;
  dec.scores_t.resize(n, config.dim);
  dec.scores_u.resize(n, config.dim);
  dec.loadings_p.resize(da, config.dim);
  dec.loadings_q.resize(db, config.dim);
  dec.inner_d.resize(config.dim);
  double first_sigma = 0.0;
  const double cov_scale = 1.0 / static_cast<double>(std::max<Index>(n - 1, 1));
  for (Index j = 0; j < config.dim; ++j) {
    const Matrix cross = cov_scale * ea * eb.transpose();
    auto pair = detail::leading_singular_pair(cross, config.max_power_iters, config.power_tol);
    if (j == 0) first_sigma = pair.sigma;
    if (!(pair.sigma >= 1e-12) || (j > 0 && pair.sigma < 1e-12 * first_sigma))
      fail(Errc::no_covariance_structure,
           "pls: cross-covariance vanished after " + std::to_string(j) + " components");
    // Sign convention on the a-side weight; flip the pair jointly.
    Index big = 0;
    pair.u.cwiseAbs().maxCoeff(&big);
    if (pair.u(big) < 0) {
      pair.u = -pair.u;
      pair.v = -pair.v;
    }
    const Vector t = ea.transpose() * pair.u;
    const Vector u = eb.transpose() * pair.v;
    const double tt = t.squaredNorm();
    const double uu = u.squaredNorm();
    const Vector load_p = tt > 0 ? Vector(ea * t / tt) : Vector::Zero(da);
    const Vector load_q = uu > 0 ? Vector(eb * u / uu) : Vector::Zero(db);
    ea -= load_p * t.transpose();
    eb -= load_q * u.transpose();
    p.wa.col(j) = pair.u;
    p.wb.col(j) = pair.v;
    p.hyperparams["covariance_" + std::to_string(j + 1)] = pair.sigma;
    dec.scores_t.col(j) = t;
    dec.scores_u.col(j) = u;
    dec.loadings_p.col(j) = load_p;
    dec.loadings_q.col(j) = load_q;
    dec.inner_d(j) = tt > 0 ? u.dot(t) / tt : 0.0;
  }
  p.hyperparams["dim"] = static_cast<double>(config.dim);
  if (decomposition) *decomposition = std::move(dec);
  return p;
}

}  // namespace xms
