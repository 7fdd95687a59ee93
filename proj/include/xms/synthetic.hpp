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

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "xms/dataset_io.hpp"

namespace xms {

/// Generator for paired two-modality data with planted class structure.
/// Each pair shares a latent code z_i = class centre + instance variation;
/// each modality sees z_i through its own random linear map, plus a
/// modality-private nuisance subspace and isotropic noise.
struct SyntheticSpec {
  Index n = 400;
  int classes = 3;
  Index da = 128;
  Index db = 128;
  Index latent_dim = 8;
  double class_separation = 1.0;
  double instance_scale = 1.0;
  Index nuisance_dim = 6;
  double nuisance_scale = 2.0;
  double noise = 0.6;
  std::uint64_t seed = 2016;
};

inline PairedMultimodalDataset make_synthetic(const SyntheticSpec& spec) {
  require(spec.n >= spec.classes && spec.classes >= 1, Errc::invalid_argument,
          "make_synthetic: need at least one sample per class");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Index rows, Index cols, double scale) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = scale * normal(rng);
    return m;
  };
  const Matrix centres = gaussian(spec.latent_dim, spec.classes, spec.class_separation);
  const Matrix map_a = gaussian(spec.da, spec.latent_dim, 1.0 / std::sqrt(static_cast<double>(spec.latent_dim)));
  const Matrix map_b = gaussian(spec.db, spec.latent_dim, 1.0 / std::sqrt(static_cast<double>(spec.latent_dim)));
  const Index nd = std::max<Index>(spec.nuisance_dim, 1);
  const Matrix nuis_a = gaussian(spec.da, nd, 1.0 / std::sqrt(static_cast<double>(nd)));
  const Matrix nuis_b = gaussian(spec.db, nd, 1.0 / std::sqrt(static_cast<double>(nd)));

  std::vector<Index> order(static_cast<std::size_t>(spec.n));
  std::iota(order.begin(), order.end(), Index{0});
  detail::shuffle(order, rng);
  std::vector<int> labels(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i)
    labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = static_cast<int>(i % spec.classes) + 1;

  Matrix z(spec.latent_dim, spec.n);
  for (Index i = 0; i < spec.n; ++i)
    z.col(i) = centres.col(labels[static_cast<std::size_t>(i)] - 1) +
               gaussian(spec.latent_dim, 1, spec.instance_scale);
  const double nuisance = spec.nuisance_dim > 0 ? spec.nuisance_scale : 0.0;
  Matrix xa = map_a * z + nuis_a * gaussian(nd, spec.n, nuisance) + gaussian(spec.da, spec.n, spec.noise);
  Matrix xb = map_b * z + nuis_b * gaussian(nd, spec.n, nuisance) + gaussian(spec.db, spec.n, spec.noise);
  return PairedMultimodalDataset(FeatureMatrix(std::move(xa)), FeatureMatrix(std::move(xb)),
                                 std::move(labels), spec.classes);
}

}  // namespace xms
