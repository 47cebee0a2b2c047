#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kendall_lab/errors.hpp"
#include "kendall_lab/hoeffding.hpp"
#include "kendall_lab/kendall.hpp"
#include "kendall_lab/spectral.hpp"

using namespace kendall_lab;
using cplx = std::complex<double>;

namespace {

SymmetricMatrix random_symmetric(std::size_t order, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  SymmetricMatrix m(order);
  for (std::size_t i = 0; i < order; ++i) {
    for (std::size_t j = 0; j <= i; ++j) m(i, j) = g(rng);
  }
  return m;
}

SymmetricMatrix outer(const std::vector<double>& v) {
  SymmetricMatrix m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) m(i, j) = v[i] * v[j];
  }
  return m;
}

}  // namespace

TEST(Eigen, IdentityAndProjector) {
  const auto id = eigenvalues(SymmetricMatrix::identity(5));
  for (double v : id.eigenvalues()) EXPECT_NEAR(v, 1.0, 1e-15);
  const auto s = eigenvalues(outer({0.6, 0.0, 0.8, 0.0}));
  EXPECT_NEAR(s.max(), 1.0, 1e-14);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) EXPECT_NEAR(s.eigenvalues()[i], 0.0, 1e-14);
}

TEST(Eigen, SumEqualsTrace) {
  const auto m = random_symmetric(50, 1);
  const auto s = eigenvalues(m);
  double sum = 0.0;
  for (double v : s.eigenvalues()) sum += v;
  EXPECT_NEAR(sum, m.trace(), 1e-8 * m.to_dense().norm());
  EXPECT_TRUE(std::is_sorted(s.eigenvalues().begin(), s.eigenvalues().end()));
}

TEST(Eigen, VectorsDiagonalize) {
  const auto m = random_symmetric(30, 2);
  const auto d = eigen_symmetric(m);
  const Eigen::MatrixXd dense = m.to_dense();
  for (std::size_t k = 0; k < 30; ++k) {
    const Eigen::VectorXd v = d.vectors.col(static_cast<Eigen::Index>(k));
    EXPECT_LE((dense * v - d.spectrum.eigenvalues()[k] * v).norm(), 1e-10);
  }
}

TEST(Eigen, RejectsNonFinite) {
  SymmetricMatrix m(3);
  m(1, 0) = NAN;
  EXPECT_THROW(eigenvalues(m), std::exception);
}

TEST(Esd, CdfBasics) {
  const EmpiricalDistribution e({0.0, 1.0});
  EXPECT_EQ(e.cdf(0.5), 0.5);
  EXPECT_EQ(e.cdf(1.0), 1.0);
  EXPECT_EQ(e.cdf(-0.1), 0.0);
  EXPECT_EQ(e.cdf_left(1.0), 0.5);
}

TEST(Esd, HistogramCountsEverything) {
  const auto s = eigenvalues(random_symmetric(80, 3));
  const auto h = esd(s).histogram();
  EXPECT_GE(h.counts.size(), 30U);
  EXPECT_EQ(h.edges.size(), h.counts.size() + 1);
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  EXPECT_EQ(total, 80U);
  EXPECT_EQ(esd(s).histogram(7).counts.size(), 7U);
}

TEST(Ks, SelfDistanceIsZero) {
  const auto s = eigenvalues(random_symmetric(40, 4));
  EXPECT_EQ(ks_distance(esd(s), esd(s)), 0.0);
}

TEST(Ks, PointMassAgainstAtomicLaw) {
  const EmpiricalDistribution zeros(std::vector<double>(10, 0.0));
  EXPECT_NEAR(ks_distance(zeros, MPLaw(2.0)), 0.5, 1e-12);
}

TEST(Ks, TwoSampleHandCase) {
  EXPECT_NEAR(ks_distance(EmpiricalDistribution({1, 2, 3, 4}), EmpiricalDistribution({3, 4, 5, 6})), 0.5, 1e-15);
}

TEST(Ks, TauAgainstHAtFigureScale) {
  const auto x = generate(1225, 70, Marginal::uniform01, 1);
  const auto tau = eigenvalues(tau_fast(x));
  const auto h = eigenvalues(h_matrix(hoeffding_parts(x, ProjectionMode::exact_cdf)));
  EXPECT_LE(ks_distance(esd(tau), esd(h)), 5.0 * 70 / 1225);
}

TEST(Stieltjes, ZeroSpectrumIsPole) {
  const Spectrum s(std::vector<double>(6, 0.0));
  const cplx z{0.3, 0.7};
  EXPECT_LE(std::abs(stieltjes_empirical(s, z) - 1.0 / z), 1e-15);
}

TEST(Stieltjes, LaurentBoundAndHerglotz) {
  const auto s = eigenvalues(random_symmetric(25, 5));
  const double top = std::max(std::abs(s.min()), std::abs(s.max()));
  for (double y : {1e2, 1e4}) {
    const cplx z{0.0, y};
    EXPECT_LE(std::abs(stieltjes_empirical(s, z) - 1.0 / z), std::abs(1.0 / z) * top / y);
  }
  for (double im : {-1.0, 0.2, 3.0}) EXPECT_LT(stieltjes_empirical(s, {0.4, im}).imag() * im, 0.0);
  EXPECT_THROW(stieltjes_empirical(s, {0.4, 0.0}), ValidationError);
}

TEST(Resolvent, ScalarCases) {
  const auto g0 = resolvent(SymmetricMatrix(4), {0.0, 2.0});
  EXPECT_LE((g0 - Eigen::MatrixXcd::Identity(4, 4) / cplx{0.0, 2.0}).norm(), 1e-15);
  const auto g1 = resolvent(SymmetricMatrix::identity(4), {0.0, 2.0});
  EXPECT_LE((g1 - Eigen::MatrixXcd::Identity(4, 4) / cplx{-1.0, 2.0}).norm(), 1e-15);
}

TEST(Resolvent, TraceMatchesStieltjes) {
  const auto m = random_symmetric(40, 6);
  const cplx z{0.5, 0.8};
  EXPECT_LE(std::abs(resolvent(m, z).trace() / 40.0 - stieltjes_empirical(eigenvalues(m), z)), 1e-8);
}

TEST(Rank, SimpleCases) {
  EXPECT_EQ(numerical_rank(SymmetricMatrix(6)), 0U);
  EXPECT_EQ(numerical_rank(outer({1.0, 2.0, -1.0})), 1U);
  EXPECT_EQ(numerical_rank(SymmetricMatrix::identity(7)), 7U);
}

TEST(Rank, TauMinusHIsLowRank) {
  const auto x = generate(100, 20, Marginal::uniform01, 8);
  const auto r = numerical_rank(tau_fast(x) - h_matrix(hoeffding_parts(x, ProjectionMode::exact_cdf)));
  EXPECT_GE(r, 1U);
  EXPECT_LE(r, 100U);
}

TEST(Spectrum, MetaRatios) {
  const SpectrumMeta meta{70, 1225, MatrixSource::h};
  EXPECT_DOUBLE_EQ(meta.q(), 17.5);
  EXPECT_DOUBLE_EQ(meta.q_prime(), 2450.0 / 4830.0);
  EXPECT_EQ(parse_source("tau"), MatrixSource::tau);
  EXPECT_THROW(parse_source("x"), ValidationError);
}
