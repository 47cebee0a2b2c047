#pragma once

#include <complex>
#include <cstddef>

namespace kendall_lab {

/// Law of shift + scale * Y_q, where Y_q is Marchenko-Pastur with ratio q.
///
/// Y_q has density sqrt((l+ - x)(x - l-)) / (2 pi q x) on [l-, l+] with
/// l+- = (1 +- sqrt q)^2, plus an atom of mass 1 - 1/q at 0 when q > 1.
/// The affine image moves the atom to `shift`.
class MPLaw {
 public:
  MPLaw(double q, double scale = 1.0, double shift = 0.0);

  double q() const noexcept { return q_; }
  double scale() const noexcept { return scale_; }
  double shift() const noexcept { return shift_; }

  /// Edges of the continuous part, shift + scale * (1 -+ sqrt q)^2.
  double lower_edge() const noexcept;
  double upper_edge() const noexcept;

  double atom_mass() const noexcept { return q_ > 1.0 ? 1.0 - 1.0 / q_ : 0.0; }
  double atom_location() const noexcept { return shift_; }

  /// Density of the continuous part; zero outside the support.
  double density(double x) const noexcept;

  /// P(X <= x), atom included. Closed-form antiderivative.
  double cdf(double x) const noexcept;
  /// P(X < x).
  double cdf_left(double x) const noexcept;
  /// P(X <= x) by adaptive Gauss-Kronrod quadrature of the density.
  double cdf_quadrature(double x) const;

  /// Stieltjes transform g(z) = E[1 / (z - X)]. Throws ValidationError on the support.
  std::complex<double> stieltjes(std::complex<double> z) const;

  /// E[X^k] for k in 1..4 from the Narayana moments of Y_q.
  double moment(int k) const;
  double mean() const noexcept { return shift_ + scale_; }

  bool operator==(const MPLaw&) const = default;

 private:
  // Continuous mass of Y_q on [l-, y].
  double standard_continuous_cdf(double y) const noexcept;

  double q_;
  double scale_;
  double shift_;
};

/// k-th raw moment of Y_q, sum over j of Narayana(k, j) q^(j-1).
double mp_standard_moment(double q, int k);

enum class Regime { linear, quadratic };

/// Linear regime: 1/3 + (2/3) Y_{p/n}. Quadratic regime: (1/3) Y_{2p/(n(n-1))}.
MPLaw law_for_regime(std::size_t n, std::size_t p, Regime regime);

/// Aspect ratios q = p/n and q' = 2p/(n(n-1)).
double linear_ratio(std::size_t n, std::size_t p);
double quadratic_ratio(std::size_t n, std::size_t p);

}  // namespace kendall_lab
