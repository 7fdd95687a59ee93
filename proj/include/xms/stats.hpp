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
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "xms/error.hpp"

namespace xms {

struct SummaryStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double var = 0.0;  // 1/(n-1); 0 for a single value
  double std = 0.0;
  std::size_t count = 0;
};

inline SummaryStats summarize(std::span<const double> values) {
  require(!values.empty(), Errc::invalid_argument, "summarize: no values");
  SummaryStats s;
  s.count = values.size();
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.var = ss / static_cast<double>(values.size() - 1);
  }
  s.std = std::sqrt(s.var);
  return s;
}

struct TTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  double degrees_of_freedom = 0.0;
  bool significant_at_005 = false;
};

/// Two-sided two-sample t-test. Student's pooled-variance form by default,
/// Welch's unequal-variance form on request. With zero variance the result is
/// p = 1 for equal means and p = 0 otherwise.
inline TTestResult students_t_test(std::span<const double> a, std::span<const double> b,
                                   bool welch = false) {
  require(a.size() >= 2 && b.size() >= 2, Errc::invalid_argument,
          "students_t_test: each sample needs at least two values");
  const SummaryStats sa = summarize(a);
  const SummaryStats sb = summarize(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  TTestResult r;
  double se2 = 0.0;
  if (welch) {
    const double va = sa.var / na, vb = sb.var / nb;
    se2 = va + vb;
    r.degrees_of_freedom = se2 > 0 ? se2 * se2 / (va * va / (na - 1) + vb * vb / (nb - 1)) : na + nb - 2;
  } else {
    const double pooled = ((na - 1) * sa.var + (nb - 1) * sb.var) / (na + nb - 2);
    se2 = pooled * (1.0 / na + 1.0 / nb);
    r.degrees_of_freedom = na + nb - 2;
  }
  const double diff = sa.mean - sb.mean;
  if (!(se2 > 0.0)) {
    if (diff == 0.0) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_statistic = diff > 0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
  } else {
    r.t_statistic = diff / std::sqrt(se2);
    const boost::math::students_t dist(r.degrees_of_freedom);
    r.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_statistic))), 0.0, 1.0);
  }
  r.significant_at_005 = r.p_value < 0.05;
  return r;
}

/// Linear-interpolation quantile between order statistics (h = (n-1) p).
inline double quantile_linear(std::span<const double> sorted, double p) {
  require(!sorted.empty(), Errc::invalid_argument, "quantile: no values");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct BoxStats {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
};

/// Box-plot statistics: whiskers reach the most extreme values inside
/// [q25 - 1.5 IQR, q75 + 1.5 IQR]; everything beyond is an outlier.
inline BoxStats box_stats(std::span<const double> values) {
  require(!values.empty(), Errc::invalid_argument, "box_stats: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxStats b;
  b.median = quantile_linear(sorted, 0.5);
  b.q25 = quantile_linear(sorted, 0.25);
  b.q75 = quantile_linear(sorted, 0.75);
  const double iqr = b.q75 - b.q25;
  const double lo_fence = b.q25 - 1.5 * iqr;
  const double hi_fence = b.q75 + 1.5 * iqr;
  b.whisker_low = b.q25;
  b.whisker_high = b.q75;
  bool low_set = false;
  for (double v : sorted) {
    if (v < lo_fence || v > hi_fence) {
      b.outliers.push_back(v);
      continue;
    }
    if (!low_set) {
      b.whisker_low = v;
      low_set = true;
    }
    b.whisker_high = v;
  }
  return b;
}

}  // namespace xms
