#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "kendall_lab/datagen.hpp"
#include "kendall_lab/errors.hpp"
#include "test_support.hpp"

using namespace kendall_lab;

TEST(Datagen, SmallestMatrixHasDistinctUnitValues) {
  const auto x = generate(1, 2, Marginal::uniform01, 11);
  ASSERT_EQ(x.p(), 1U);
  ASSERT_EQ(x.n(), 2U);
  EXPECT_NE(x(0, 0), x(0, 1));
  for (double v : x.values()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Datagen, SameSeedSameMatrix) {
  const auto a = generate(3, 5, Marginal::standard_gaussian, 42);
  const auto b = generate(3, 5, Marginal::standard_gaussian, 42);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, generate(3, 5, Marginal::standard_gaussian, 43));
}

TEST(Datagen, ThreadCountDoesNotChangeValues) {
  for (auto m : {Marginal::uniform01, Marginal::standard_gaussian, Marginal::standard_cauchy}) {
    const auto one = generate(37, 41, m, 5, 1);
    EXPECT_EQ(one, generate(37, 41, m, 5, 3));
    EXPECT_EQ(one, generate(37, 41, m, 5, 8));
  }
}

TEST(Datagen, UniformRowMeansWithinFourSigma) {
  const std::size_t n = 1000;
  const auto x = generate(2, n, Marginal::uniform01, 3);
  const double sigma = std::sqrt(1.0 / 12.0);
  for (std::size_t k = 0; k < 2; ++k) {
    double mean = 0.0;
    for (double v : x.row(k)) mean += v;
    mean /= static_cast<double>(n);
    EXPECT_LE(std::abs(mean - 0.5), 4.0 * sigma / std::sqrt(static_cast<double>(n)));
  }
}

// Sample KS against the marginal's own CDF; 1.63/sqrt(N) is the 1% critical value.
TEST(Datagen, SamplesFollowTheirMarginal) {
  const std::size_t n = 4000;
  for (auto m : {Marginal::uniform01, Marginal::standard_gaussian, Marginal::standard_cauchy}) {
    const auto x = generate(1, n, m, 17);
    std::vector<double> v(x.values().begin(), x.values().end());
    std::sort(v.begin(), v.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = marginal_cdf(m, v[i]);
      d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
    }
    EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(n))) << to_string(m);
  }
}

TEST(Datagen, RowsHaveNoTies) {
  const auto x = generate(20, 500, Marginal::standard_cauchy, 9);
  for (std::size_t k = 0; k < x.p(); ++k) {
    std::set<double> seen(x.row(k).begin(), x.row(k).end());
    EXPECT_EQ(seen.size(), x.n());
  }
}

TEST(Datagen, ValidationErrors) {
  EXPECT_THROW(generate(0, 5, Marginal::uniform01, 1), ValidationError);
  EXPECT_THROW(generate(2, 1, Marginal::uniform01, 1), ValidationError);
  EXPECT_THROW(generate(2, 5, Marginal::external, 1), ValidationError);
  EXPECT_THROW(kendall_lab::testing::rows({{1.0, 1.0, 2.0}}), ValidationError);
  EXPECT_THROW(kendall_lab::testing::rows({{1.0, NAN, 2.0}}), ValidationError);
}

TEST(Datagen, MarginalTags) {
  EXPECT_EQ(parse_marginal("uniform01"), Marginal::uniform01);
  EXPECT_EQ(parse_marginal("gaussian"), Marginal::standard_gaussian);
  EXPECT_EQ(parse_marginal("standard_cauchy"), Marginal::standard_cauchy);
  EXPECT_THROW(parse_marginal("poisson"), ValidationError);
  for (auto m : {Marginal::uniform01, Marginal::standard_gaussian, Marginal::standard_cauchy, Marginal::external}) {
    EXPECT_EQ(parse_marginal(to_string(m)), m);
  }
  EXPECT_FALSE(has_closed_form_cdf(Marginal::external));
  EXPECT_DOUBLE_EQ(marginal_cdf(Marginal::standard_gaussian, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(marginal_cdf(Marginal::standard_cauchy, 1.0), 0.75);
}

TEST(Datagen, RowStreamsAreIndependentOfShape) {
  // Row k of a taller matrix equals row k of a shorter one.
  const auto small = generate(3, 10, Marginal::uniform01, 21);
  const auto tall = generate(9, 10, Marginal::uniform01, 21);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(small(k, i), tall(k, i));
  }
}
