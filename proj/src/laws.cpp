#include "kendall_lab/laws.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "kendall_lab/errors.hpp"

namespace kendall_lab {

namespace {

constexpr double kPi = std::numbers::pi;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

MPLaw::MPLaw(double q, double scale, double shift) : q_(q), scale_(scale), shift_(shift) {
  if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("MPLaw: need q > 0");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("MPLaw: need scale > 0");
  if (!(shift >= 0.0) || !std::isfinite(shift)) throw ValidationError("MPLaw: need shift >= 0");
}

double MPLaw::lower_edge() const noexcept {
  const double s = 1.0 - std::sqrt(q_);
  return shift_ + scale_ * s * s;
}

double MPLaw::upper_edge() const noexcept {
  const double s = 1.0 + std::sqrt(q_);
  return shift_ + scale_ * s * s;
}

double MPLaw::density(double x) const noexcept {
  const double y = (x - shift_) / scale_;
  const double rq = std::sqrt(q_);
  const double lo = (1.0 - rq) * (1.0 - rq);
  const double hi = (1.0 + rq) * (1.0 + rq);
  if (y <= lo || y >= hi || y <= 0.0) return 0.0;
  return std::sqrt((hi - y) * (y - lo)) / (2.0 * kPi * q_ * y) / scale_;
}

// Parametrize y = m - r cos(theta), m = 1 + q, r = 2 sqrt(q), theta in [0, pi].
// The continuous mass on [l-, y(theta)] is
//   (m theta + r sin theta - 2|1-q| atan(k tan(theta/2))) / (2 pi q),
// with k = (1 + sqrt q) / |1 - sqrt q|.
double MPLaw::standard_continuous_cdf(double y) const noexcept {
  const double rq = std::sqrt(q_);
  const double m = 1.0 + q_;
  const double r = 2.0 * rq;
  const double lo = (1.0 - rq) * (1.0 - rq);
  const double hi = (1.0 + rq) * (1.0 + rq);
  if (y <= lo) return 0.0;
  const double total = q_ > 1.0 ? 1.0 / q_ : 1.0;
  if (y >= hi) return total;
  const double theta = std::acos(std::clamp((m - y) / r, -1.0, 1.0));
  const double gap = std::abs(1.0 - q_);
  // atan(k tan(t/2)) written with atan2 so theta = pi is exact.
  const double half = 0.5 * theta;
  const double twist =
      gap == 0.0 ? 0.0
                 : 2.0 * gap * std::atan2((1.0 + rq) * std::sin(half), std::abs(1.0 - rq) * std::cos(half));
  const double value = (m * theta + r * std::sin(theta) - twist) / (2.0 * kPi * q_);
  return std::clamp(value, 0.0, total);
}

double MPLaw::cdf(double x) const noexcept {
  const double y = (x - shift_) / scale_;
  const double atom = y >= 0.0 ? atom_mass() : 0.0;
  return std::min(1.0, atom + standard_continuous_cdf(y));
}

double MPLaw::cdf_left(double x) const noexcept {
  const double y = (x - shift_) / scale_;
  const double atom = y > 0.0 ? atom_mass() : 0.0;
  return std::min(1.0, atom + standard_continuous_cdf(y));
}

double MPLaw::cdf_quadrature(double x) const {
  const double y = (x - shift_) / scale_;
  const double atom = y >= 0.0 ? atom_mass() : 0.0;
  const double rq = std::sqrt(q_);
  const double m = 1.0 + q_;
  const double r = 2.0 * rq;
  const double lo = (1.0 - rq) * (1.0 - rq);
  if (y <= lo) return atom;
  const double theta_end = std::acos(std::clamp((m - y) / r, -1.0, 1.0));
  // With y = m - r cos t the density times dy becomes r^2 sin^2 t / (2 pi q y),
  // smooth on [0, pi] for every q (including q = 1 where l- = 0).
  auto integrand = [&](double t) {
    const double s = std::sin(t);
    const double half = std::sin(0.5 * t);
    const double yy = lo + 2.0 * r * half * half;  // m - r cos t without cancellation
    if (yy <= 0.0) return r * (1.0 + std::cos(t)) / (2.0 * kPi * q_);
    return r * r * s * s / (2.0 * kPi * q_ * yy);
  };
  using boost::math::quadrature::gauss_kronrod;
  const double mass = gauss_kronrod<double, 61>::integrate(integrand, 0.0, theta_end, 20, 1e-14);
  return atom + mass;
}

std::complex<double> MPLaw::stieltjes(std::complex<double> z) const {
  const std::complex<double> w = (z - shift_) / scale_;
  const double rq = std::sqrt(q_);
  const double lo = (1.0 - rq) * (1.0 - rq);
  const double hi = (1.0 + rq) * (1.0 + rq);
  if (w.imag() == 0.0 && w.real() >= lo && w.real() <= hi) {
    throw ValidationError("MPLaw::stieltjes: z lies on the support");
  }
  if (w == 0.0 && atom_mass() > 0.0) throw ValidationError("MPLaw::stieltjes: z is the atom");
  // Product of principal roots: behaves like w at infinity, cut on [lo, hi].
  const std::complex<double> root = std::sqrt(w - lo) * std::sqrt(w - hi);
  const std::complex<double> g = (w + q_ - 1.0 - root) / (2.0 * q_ * w);
  return g / scale_;
}

double mp_standard_moment(double q, int k) {
  if (k < 1) throw ValidationError("mp_standard_moment: need k >= 1");
  double sum = 0.0;
  double power = 1.0;
  for (int j = 1; j <= k; ++j) {
    sum += binomial(k, j) * binomial(k, j - 1) / k * power;
    power *= q;
  }
  return sum;
}

double MPLaw::moment(int k) const {
  if (k < 1 || k > 4) throw ValidationError("MPLaw::moment: k must be in 1..4");
  // E[(b + aY)^k] = sum_j C(k,j) b^(k-j) a^j E[Y^j].
  double sum = 0.0;
  for (int j = 0; j <= k; ++j) {
    const double ym = j == 0 ? 1.0 : mp_standard_moment(q_, j);
    sum += binomial(k, j) * std::pow(shift_, k - j) * std::pow(scale_, j) * ym;
  }
  return sum;
}

double linear_ratio(std::size_t n, std::size_t p) {
  if (n < 2 || p < 1) throw ValidationError("need n >= 2 and p >= 1");
  return static_cast<double>(p) / static_cast<double>(n);
}

double quadratic_ratio(std::size_t n, std::size_t p) {
  if (n < 2 || p < 1) throw ValidationError("need n >= 2 and p >= 1");
  return 2.0 * static_cast<double>(p) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

MPLaw law_for_regime(std::size_t n, std::size_t p, Regime regime) {
  switch (regime) {
    case Regime::linear:
      return MPLaw(linear_ratio(n, p), 2.0 / 3.0, 1.0 / 3.0);
    case Regime::quadratic:
      return MPLaw(quadratic_ratio(n, p), 1.0 / 3.0, 0.0);
  }
  throw ValidationError("law_for_regime: unknown regime");
}

}  // namespace kendall_lab
