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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "xms/stats.hpp"

using namespace xms;

namespace {

// Two-sided p-value by direct quadrature of the Student t density.
double quadrature_p_value(double t, double dof) {
  const double log_norm = std::lgamma((dof + 1) / 2) - std::lgamma(dof / 2) - 0.5 * std::log(dof * std::numbers::pi);
  auto density = [&](double x) { return std::exp(log_norm - (dof + 1) / 2 * std::log1p(x * x / dof)); };
  const double central = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(density, 0.0, std::abs(t), 20, 1e-14);
  return std::clamp(1.0 - 2.0 * central, 0.0, 1.0);
}

}  // namespace

TEST(Summarize, Examples) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto s = summarize(v);
  EXPECT_DOUBLE_EQ(s.min, 1);
  EXPECT_DOUBLE_EQ(s.max, 4);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.var, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.std * s.std, s.var);
  const std::vector<double> one{0.7};
  const auto single = summarize(one);
  EXPECT_EQ(single.var, 0.0);
  EXPECT_EQ(single.min, single.max);
  EXPECT_THROW(summarize(std::vector<double>{}), Error);
}

TEST(TTest, KnownValues) {
  // Pooled: means 2 and 5, both variances 1, n = 3: t = -3 / sqrt(2/3), df 4.
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  const auto r = students_t_test(a, b);
  EXPECT_NEAR(r.t_statistic, -3.0 / std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(r.degrees_of_freedom, 4.0);
  EXPECT_NEAR(r.p_value, 0.021311641128756, 1e-9);  // reference t-table value
  EXPECT_TRUE(r.significant_at_005);
  const auto w = students_t_test(a, b, true);
  EXPECT_NEAR(w.t_statistic, r.t_statistic, 1e-12);
  EXPECT_NEAR(w.degrees_of_freedom, 4.0, 1e-12);
}

TEST(TTest, DegenerateSamples) {
  const std::vector<double> c{0.5, 0.5, 0.5}, d{0.5, 0.5}, e{0.75, 0.75};
  EXPECT_DOUBLE_EQ(students_t_test(c, d).p_value, 1.0);
  EXPECT_DOUBLE_EQ(students_t_test(c, e).p_value, 0.0);
  EXPECT_TRUE(std::isinf(students_t_test(c, e).t_statistic));
  EXPECT_THROW(students_t_test(std::vector<double>{1.0}, c), Error);
}

TEST(TTest, SymmetricUnderSwap) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(8), b(11);
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng) + 0.3;
    for (bool welch : {false, true}) {
      const auto ab = students_t_test(a, b, welch);
      const auto ba = students_t_test(b, a, welch);
      EXPECT_NEAR(ab.t_statistic, -ba.t_statistic, 1e-12);
      EXPECT_NEAR(ab.p_value, ba.p_value, 1e-14);
    }
  }
}

TEST(TTest, PValuesMatchDensityQuadrature) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> size(2, 40);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
    const double shift = 0.5 * normal(rng);
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng) * (1 + trial % 3) + shift;
    const bool welch = trial % 2 == 1;
    const auto r = students_t_test(a, b, welch);
    ASSERT_NEAR(r.p_value, quadrature_p_value(r.t_statistic, r.degrees_of_freedom), 1e-6) << trial;
  }
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(quantile_linear(v, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile_linear(v, 0.1), 1.4);
  EXPECT_DOUBLE_EQ(quantile_linear(v, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile_linear(std::vector<double>{7.0}, 0.3), 7.0);
}

TEST(BoxStats, Examples) {
  const std::vector<double> v{5, 3, 1, 4, 2};
  const auto b = box_stats(v);
  EXPECT_DOUBLE_EQ(b.median, 3);
  EXPECT_DOUBLE_EQ(b.q25, 2);
  EXPECT_DOUBLE_EQ(b.q75, 4);
  EXPECT_DOUBLE_EQ(b.whisker_low, 1);
  EXPECT_DOUBLE_EQ(b.whisker_high, 5);
  EXPECT_TRUE(b.outliers.empty());

  const auto flat = box_stats(std::vector<double>{2, 2, 2});
  EXPECT_DOUBLE_EQ(flat.median, 2);
  EXPECT_DOUBLE_EQ(flat.whisker_low, 2);
  EXPECT_DOUBLE_EQ(flat.whisker_high, 2);
  EXPECT_TRUE(flat.outliers.empty());

  // q25 = 1.75, q75 = 27.25, upper fence 65.5: 100 is an outlier.
  const auto skew = box_stats(std::vector<double>{1, 2, 3, 100});
  EXPECT_DOUBLE_EQ(skew.median, 2.5);
  EXPECT_DOUBLE_EQ(skew.q25, 1.75);
  EXPECT_DOUBLE_EQ(skew.q75, 27.25);
  EXPECT_DOUBLE_EQ(skew.whisker_high, 3);
  EXPECT_EQ(skew.outliers, (std::vector<double>{100}));
}

TEST(BoxStats, IntegerQuantileOracle) {
  // For 4m + 1 sorted integers the quartiles land exactly on order statistics.
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng() % 20;
    std::vector<double> v(4 * m + 1);
    for (auto& x : v) x = static_cast<double>(rng() % 1000);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const auto b = box_stats(v);
    ASSERT_EQ(b.q25, sorted[m]);
    ASSERT_EQ(b.median, sorted[2 * m]);
    ASSERT_EQ(b.q75, sorted[3 * m]);
    const double iqr = b.q75 - b.q25;
    for (double o : b.outliers) ASSERT_TRUE(o < b.q25 - 1.5 * iqr || o > b.q75 + 1.5 * iqr);
    ASSERT_GE(b.whisker_low, b.q25 - 1.5 * iqr);
    ASSERT_LE(b.whisker_high, b.q75 + 1.5 * iqr);
  }
}
