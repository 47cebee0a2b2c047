#include <gtest/gtest.h>

#include <random>

#include "kendall_lab/errors.hpp"
#include "kendall_lab/kendall.hpp"
#include "test_support.hpp"

using namespace kendall_lab;
using kendall_lab::testing::kendall_oracle;
using kendall_lab::testing::rows;

TEST(PairIndex, RoundTrip) {
  const std::size_t n = 9;
  std::size_t expected = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      EXPECT_EQ(pair_position({i, j}, n), expected);
      const auto back = pair_at(expected, n);
      EXPECT_EQ(back.i, i);
      EXPECT_EQ(back.j, j);
      ++expected;
    }
  }
  EXPECT_EQ(expected, pair_count(n));
}

TEST(PairSigns, HandFixtures) {
  const auto x = rows({{1, 2, 3}, {3, 1, 2}});
  const auto s = pair_signs(x);
  ASSERT_EQ(s.pairs(), 3U);
  const std::vector<int> first = {-1, -1, -1}, second = {1, 1, -1};
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(s(0, c), first[c]);
    EXPECT_EQ(s(1, c), second[c]);
  }
}

TEST(PairSigns, IncreasingRowIsAllNegative) {
  const auto s = pair_signs(rows({{0.1, 0.5, 0.7, 2.0, 9.0}}));
  for (auto v : s.row(0)) EXPECT_EQ(v, -1);
}

TEST(PairSigns, BudgetIsEnforced) {
  const auto x = generate(10, 50, Marginal::uniform01, 1);
  EXPECT_THROW(pair_signs(x, 100), ValidationError);
}

TEST(Tau, HandFixtureOffDiagonal) {
  const auto x = rows({{1, 2, 3}, {3, 1, 2}});
  for (const auto& t : {tau_naive(x), tau_fast(x), tau_from_signs(pair_signs(x))}) {
    EXPECT_EQ(t(0, 1), -1.0 / 3.0);
    EXPECT_EQ(t(0, 0), 1.0);
    EXPECT_EQ(t(1, 1), 1.0);
  }
}

TEST(Tau, MonotoneTransformGivesOne) {
  const auto x = rows({{0.3, 0.1, 0.8, 0.5}, {std::exp(0.3), std::exp(0.1), std::exp(0.8), std::exp(0.5)}});
  EXPECT_EQ(tau_fast(x)(0, 1), 1.0);
}

TEST(Tau, ReversedRowGivesMinusOne) {
  const auto x = rows({{1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}});
  EXPECT_EQ(tau_fast(x)(0, 1), -1.0);
  EXPECT_EQ(tau_naive(x)(0, 1), -1.0);
}

TEST(Tau, SingleVariable) {
  const auto t = tau_fast(generate(1, 7, Marginal::uniform01, 2));
  ASSERT_EQ(t.order(), 1U);
  EXPECT_EQ(t(0, 0), 1.0);
}

TEST(Tau, SingleColumnSignsGiveAllOnes) {
  const PairSignMatrix s(2, 2, {1, 1});
  const auto t = tau_from_signs(s);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(t(i, j), 1.0);
  }
}

TEST(Tau, ThreeRoutesAgreeBitExactlyOnRandomInstances) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> pick_p(1, 10), pick_n(2, 50);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = pick_p(rng), n = pick_n(rng);
    const auto marginal = static_cast<Marginal>(trial % 3);
    const auto x = generate(p, n, marginal, 1000 + trial);
    const auto naive = tau_naive(x);
    EXPECT_EQ(naive, tau_fast(x));
    EXPECT_EQ(naive, tau_from_signs(pair_signs(x)));
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b < p; ++b) EXPECT_EQ(naive(a, b), kendall_oracle(x.row(a), x.row(b)));
    }
  }
}

TEST(Tau, ThreadCountDoesNotChangeBits) {
  const auto x = generate(60, 90, Marginal::standard_gaussian, 8);
  const auto one = tau_fast(x, 1);
  EXPECT_EQ(one, tau_fast(x, 4));
  EXPECT_EQ(tau_naive(x, 1), tau_naive(x, 3));
  EXPECT_EQ(tau_from_signs(pair_signs(x), 1), tau_from_signs(pair_signs(x), 5));
}

TEST(Tau, TraceIsPAndEntriesBounded) {
  const auto t = tau_fast(generate(40, 25, Marginal::uniform01, 4));
  EXPECT_EQ(t.trace(), 40.0);
  EXPECT_LE(t.max_abs(), 1.0);
}

TEST(Tau, LargeRowsMatchOracle) {
  const auto x = generate(3, 3000, Marginal::standard_cauchy, 31);
  const auto t = tau_fast(x);
  EXPECT_EQ(t(0, 1), kendall_oracle(x.row(0), x.row(1)));
  EXPECT_EQ(t(1, 2), kendall_oracle(x.row(1), x.row(2)));
}
