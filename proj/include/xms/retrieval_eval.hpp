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
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xms/dataset_io.hpp"
#include "xms/error.hpp"

namespace xms {

struct RankedList {
  Index query_index = 0;
  std::vector<Index> gallery_order;  // by descending similarity, ties by index
  std::vector<double> similarities;  // aligned with gallery_order
};

struct Ranking {
  std::vector<RankedList> lists;
  Index zero_norm_vectors = 0;  // queries + gallery items with zero norm
};

/// Ranks every gallery column for every query column by cosine similarity.
/// Pairs involving a zero-norm vector get similarity -1.
inline Ranking rank_by_cosine(const Matrix& queries, const Matrix& gallery) {
  require(queries.rows() == gallery.rows(), Errc::dimension_mismatch,
          "rank_by_cosine: query and gallery dimensions differ");
  require(gallery.cols() >= 1, Errc::invalid_argument, "rank_by_cosine: empty gallery");
  const Vector qn = queries.colwise().norm().transpose();
  const Vector gn = gallery.colwise().norm().transpose();
  Ranking out;
  out.zero_norm_vectors = (qn.array() == 0.0).count() + (gn.array() == 0.0).count();
  const Matrix dots = queries.transpose() * gallery;
  const Index g = gallery.cols();
  out.lists.resize(static_cast<std::size_t>(queries.cols()));
  for (Index q = 0; q < queries.cols(); ++q) {
    std::vector<double> sim(static_cast<std::size_t>(g));
    for (Index j = 0; j < g; ++j)
      sim[static_cast<std::size_t>(j)] =
          (qn(q) == 0.0 || gn(j) == 0.0) ? -1.0 : std::clamp(dots(q, j) / (qn(q) * gn(j)), -1.0, 1.0);
    RankedList& list = out.lists[static_cast<std::size_t>(q)];
    list.query_index = q;
    list.gallery_order.resize(static_cast<std::size_t>(g));
    std::iota(list.gallery_order.begin(), list.gallery_order.end(), Index{0});
    std::stable_sort(list.gallery_order.begin(), list.gallery_order.end(), [&](Index a, Index b) {
      return sim[static_cast<std::size_t>(a)] > sim[static_cast<std::size_t>(b)];
    });
    list.similarities.reserve(static_cast<std::size_t>(g));
    for (Index j : list.gallery_order) list.similarities.push_back(sim[static_cast<std::size_t>(j)]);
  }
  return out;
}

/// Non-interpolated AP: mean over relevant items of precision at their rank.
/// With a cutoff R only the top R ranks count and the normalizer is
/// min(|relevant|, R).
inline double average_precision(const RankedList& ranked, std::span<const Index> relevant,
                                std::optional<Index> cutoff = std::nullopt) {
  require(!relevant.empty(), Errc::invalid_argument, "average_precision: no relevant items");
  const std::size_t g = ranked.gallery_order.size();
  std::vector<char> is_relevant(g, 0);
  for (Index r : relevant) {
    require(r >= 0 && static_cast<std::size_t>(r) < g, Errc::index_out_of_range,
            "average_precision: relevant index outside the gallery");
    is_relevant[static_cast<std::size_t>(r)] = 1;
  }
  const std::size_t n_relevant =
      static_cast<std::size_t>(std::count(is_relevant.begin(), is_relevant.end(), 1));
  std::size_t depth = g;
  if (cutoff) {
    require(*cutoff >= 1, Errc::invalid_argument, "average_precision: cutoff must be positive");
    depth = std::min(g, static_cast<std::size_t>(*cutoff));
  }
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < depth; ++rank) {
    if (is_relevant[static_cast<std::size_t>(ranked.gallery_order[rank])]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(std::min(n_relevant, depth));
}

inline double mean_average_precision(std::span<const double> per_query_ap) {
  require(!per_query_ap.empty(), Errc::invalid_argument, "mean_average_precision: no queries");
  return std::accumulate(per_query_ap.begin(), per_query_ap.end(), 0.0) /
         static_cast<double>(per_query_ap.size());
}

namespace detail {

inline std::size_t match_rank(const RankedList& list, Index match) {
  const auto it = std::find(list.gallery_order.begin(), list.gallery_order.end(), match);
  require(it != list.gallery_order.end(), Errc::index_out_of_range,
          "true match " + std::to_string(match) + " not in the gallery");
  return static_cast<std::size_t>(it - list.gallery_order.begin());
}

}  // namespace detail

/// Fraction of queries whose true match (true_match[q]) ranks within the top K.
inline double acc_at_k(std::span<const RankedList> ranked, std::span<const Index> true_match, Index k) {
  require(ranked.size() == true_match.size() && !ranked.empty(), Errc::invalid_argument,
          "acc_at_k: one true match per query required");
  const auto g = static_cast<Index>(ranked.front().gallery_order.size());
  require(k >= 1 && k <= g, Errc::invalid_argument, "acc_at_k: K must lie in 1..gallery size");
  std::size_t hits = 0;
  for (std::size_t q = 0; q < ranked.size(); ++q)
    if (static_cast<Index>(detail::match_rank(ranked[q], true_match[q])) < k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(ranked.size());
}

/// acc@K for K = 1..gallery size.
inline std::vector<double> cmc_curve(std::span<const RankedList> ranked, std::span<const Index> true_match) {
  require(ranked.size() == true_match.size() && !ranked.empty(), Errc::invalid_argument,
          "cmc_curve: one true match per query required");
  const std::size_t g = ranked.front().gallery_order.size();
  std::vector<double> counts(g, 0.0);
  for (std::size_t q = 0; q < ranked.size(); ++q) counts[detail::match_rank(ranked[q], true_match[q])] += 1.0;
  std::vector<double> curve(g);
  double running = 0.0;
  for (std::size_t k = 0; k < g; ++k) {
    running += counts[k];
    curve[k] = running / static_cast<double>(ranked.size());
  }
  return curve;
}

// ---------------------------------------------------------------------------

enum class Direction { a2b, b2a };  // a2b: photo queries, sketch gallery

inline const char* direction_name(Direction d) { return d == Direction::a2b ? "a2b" : "b2a"; }

inline Direction parse_direction(const std::string& s) {
  if (s == "a2b" || s == "photo_queries_sketch") return Direction::a2b;
  if (s == "b2a" || s == "sketch_queries_photo") return Direction::b2a;
  fail(Errc::config, "unknown direction '" + s + "' (expected a2b or b2a)");
}

struct RetrievalEvaluation {
  Direction direction = Direction::a2b;
  double map = 0.0;
  std::vector<double> per_query_ap;
  std::vector<double> cmc;  // acc@K for K = 1..gallery size
  Index zero_norm_vectors = 0;
};

/// Evaluates a paired test set already projected into the common subspace:
/// column i of both matrices is one true pair. Relevance for MAP is a shared
/// label; the instance-level match for CMC is the same column index.
inline RetrievalEvaluation evaluate_retrieval(const Matrix& proj_a, const Matrix& proj_b,
                                              std::span<const int> labels, Direction direction,
                                              std::optional<Index> map_cutoff = std::nullopt) {
  require(proj_a.cols() == proj_b.cols() && static_cast<Index>(labels.size()) == proj_a.cols(),
          Errc::pair_count_mismatch, "evaluate_retrieval: pair counts differ");
  const Matrix& queries = direction == Direction::a2b ? proj_a : proj_b;
  const Matrix& gallery = direction == Direction::a2b ? proj_b : proj_a;
  const Ranking ranking = rank_by_cosine(queries, gallery);
  RetrievalEvaluation ev;
  ev.direction = direction;
  ev.zero_norm_vectors = ranking.zero_norm_vectors;
  std::vector<Index> matches(static_cast<std::size_t>(queries.cols()));
  std::iota(matches.begin(), matches.end(), Index{0});
  for (Index q = 0; q < queries.cols(); ++q) {
    std::vector<Index> relevant;
    for (Index j = 0; j < gallery.cols(); ++j)
      if (labels[static_cast<std::size_t>(j)] == labels[static_cast<std::size_t>(q)]) relevant.push_back(j);
    ev.per_query_ap.push_back(average_precision(ranking.lists[static_cast<std::size_t>(q)], relevant, map_cutoff));
  }
  ev.map = mean_average_precision(ev.per_query_ap);
  ev.cmc = cmc_curve(ranking.lists, matches);
  return ev;
}

inline nlohmann::json to_json(const RetrievalEvaluation& ev) {
  return {{"direction", direction_name(ev.direction)},
          {"map", ev.map},
          {"per_query_ap", ev.per_query_ap},
          {"cmc", ev.cmc},
          {"zero_norm_vectors", ev.zero_norm_vectors}};
}

}  // namespace xms
