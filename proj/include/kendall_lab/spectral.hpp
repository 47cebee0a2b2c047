#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "kendall_lab/laws.hpp"
#include "kendall_lab/symmetric_matrix.hpp"

namespace kendall_lab {

enum class MatrixSource { tau, h, custom };

std::string_view to_string(MatrixSource s) noexcept;
MatrixSource parse_source(std::string_view tag);

struct SpectrumMeta {
  std::size_t n = 0;
  std::size_t p = 0;
  MatrixSource source = MatrixSource::custom;

  // Zero when n or p is unset.
  double q() const noexcept;
  double q_prime() const noexcept;
};

/// Eigenvalues sorted ascending, with provenance.
class Spectrum {
 public:
  Spectrum(std::vector<double> eigenvalues, SpectrumMeta meta = {});

  std::span<const double> eigenvalues() const noexcept { return values_; }
  const SpectrumMeta& meta() const noexcept { return meta_; }
  std::size_t size() const noexcept { return values_.size(); }
  double min() const noexcept { return values_.front(); }
  double max() const noexcept { return values_.back(); }
  double mean() const noexcept;

 private:
  std::vector<double> values_;
  SpectrumMeta meta_;
};

struct EigenDecomposition {
  Spectrum spectrum;
  Eigen::MatrixXd vectors;  // column i pairs with eigenvalue i
};

/// Full symmetric eigensolver (Householder tridiagonalization + implicit QR).
/// Throws NumericalError when the iteration fails to converge.
EigenDecomposition eigen_symmetric(const SymmetricMatrix& m, SpectrumMeta meta = {});
/// Eigenvalues only; same solver without accumulating vectors.
Spectrum eigenvalues(const SymmetricMatrix& m, SpectrumMeta meta = {});

/// 1e-9 * order * max|entry|.
double tol_eig(const SymmetricMatrix& m);
/// order * machine epsilon * max|eigenvalue|.
double tol_rank(std::size_t order, double max_abs_eigenvalue);

/// |eigenvalues| above tol_rank.
std::size_t numerical_rank(const SymmetricMatrix& m);
std::size_t numerical_rank(const Spectrum& s);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

/// Freedman-Diaconis bin count, never below `floor`.
std::size_t freedman_diaconis_bins(std::span<const double> sorted, std::size_t floor = 30);

/// Step CDF placing mass 1/p at every support point.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> points);

  std::span<const double> support() const noexcept { return points_; }
  /// P(X <= x).
  double cdf(double x) const noexcept;
  /// P(X < x).
  double cdf_left(double x) const noexcept;

  /// Equal-width histogram over [min, max]; bins == 0 picks Freedman-Diaconis.
  Histogram histogram(std::size_t bins = 0) const;
  Histogram histogram(double lo, double hi, std::size_t bins) const;

 private:
  std::vector<double> points_;
};

EmpiricalDistribution esd(const Spectrum& s);

/// sup_x |F_emp(x) - F_law(x)|, checked on both sides of every jump of either CDF.
double ks_distance(const EmpiricalDistribution& e, const MPLaw& law);
/// Two-sample version: sup_x |F_a(x) - F_b(x)|.
double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Smallest |Im z| accepted by stieltjes_empirical and resolvent.
inline constexpr double kMinImagPart = 1e-9;

/// (1/p) sum_i 1 / (z - lambda_i).
std::complex<double> stieltjes_empirical(const Spectrum& s, std::complex<double> z);

/// (zI - M)^{-1} by LU with partial pivoting.
Eigen::MatrixXcd resolvent(const SymmetricMatrix& m, std::complex<double> z);

}  // namespace kendall_lab
