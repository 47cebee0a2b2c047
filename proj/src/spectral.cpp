#include "kendall_lab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kendall_lab/errors.hpp"

namespace kendall_lab {

std::string_view to_string(MatrixSource s) noexcept {
  switch (s) {
    case MatrixSource::tau: return "tau";
    case MatrixSource::h: return "h";
    case MatrixSource::custom: return "custom";
  }
  return "custom";
}

MatrixSource parse_source(std::string_view tag) {
  if (tag == "tau") return MatrixSource::tau;
  if (tag == "h") return MatrixSource::h;
  if (tag == "custom") return MatrixSource::custom;
  throw ValidationError("unknown matrix source '" + std::string(tag) + "'");
}

double SpectrumMeta::q() const noexcept {
  return n == 0 || p == 0 ? 0.0 : static_cast<double>(p) / static_cast<double>(n);
}

double SpectrumMeta::q_prime() const noexcept {
  return n < 2 || p == 0 ? 0.0 : 2.0 * static_cast<double>(p) / static_cast<double>(n * (n - 1));
}

Spectrum::Spectrum(std::vector<double> eigenvalues, SpectrumMeta meta)
    : values_(std::move(eigenvalues)), meta_(meta) {
  if (values_.empty()) throw ValidationError("Spectrum: no eigenvalues");
  std::sort(values_.begin(), values_.end());
}

double Spectrum::mean() const noexcept {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum / static_cast<double>(values_.size());
}

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solve(const SymmetricMatrix& m, int options) {
  if (m.order() == 0) throw ValidationError("eigen_symmetric: empty matrix");
  if (!m.all_finite()) throw ValidationError("eigen_symmetric: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.to_dense(), options);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigen_symmetric: QR iteration did not converge");
  }
  return solver;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

EigenDecomposition eigen_symmetric(const SymmetricMatrix& m, SpectrumMeta meta) {
  auto solver = solve(m, Eigen::ComputeEigenvectors);
  // Eigen returns ascending eigenvalues, matching Spectrum's ordering.
  return {Spectrum(to_vector(solver.eigenvalues()), meta), solver.eigenvectors()};
}

Spectrum eigenvalues(const SymmetricMatrix& m, SpectrumMeta meta) {
  auto solver = solve(m, Eigen::EigenvaluesOnly);
  return Spectrum(to_vector(solver.eigenvalues()), meta);
}

double tol_eig(const SymmetricMatrix& m) {
  return 1e-9 * static_cast<double>(m.order()) * m.max_abs();
}

double tol_rank(std::size_t order, double max_abs_eigenvalue) {
  return static_cast<double>(order) * std::numeric_limits<double>::epsilon() * max_abs_eigenvalue;
}

std::size_t numerical_rank(const Spectrum& s) {
  const auto values = s.eigenvalues();
  const double top = std::max(std::abs(values.front()), std::abs(values.back()));
  const double cutoff = tol_rank(values.size(), top);
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [&](double v) { return std::abs(v) > cutoff; }));
}

std::size_t numerical_rank(const SymmetricMatrix& m) { return numerical_rank(eigenvalues(m)); }

std::size_t freedman_diaconis_bins(std::span<const double> sorted, std::size_t floor) {
  const std::size_t n = sorted.size();
  if (n < 2) return std::max<std::size_t>(floor, 1);
  auto quantile = [&](double f) {
    const double pos = f * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double range = sorted.back() - sorted.front();
  if (iqr <= 0.0 || range <= 0.0) return std::max<std::size_t>(floor, 1);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
  const auto bins = static_cast<std::size_t>(std::ceil(range / width));
  return std::max(bins, std::max<std::size_t>(floor, 1));
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("EmpiricalDistribution: no support points");
  std::sort(points_.begin(), points_.end());
}

double EmpiricalDistribution::cdf(double x) const noexcept {
  const auto it = std::upper_bound(points_.begin(), points_.end(), x);
  return static_cast<double>(it - points_.begin()) / static_cast<double>(points_.size());
}

double EmpiricalDistribution::cdf_left(double x) const noexcept {
  const auto it = std::lower_bound(points_.begin(), points_.end(), x);
  return static_cast<double>(it - points_.begin()) / static_cast<double>(points_.size());
}

Histogram EmpiricalDistribution::histogram(std::size_t bins) const {
  if (bins == 0) bins = freedman_diaconis_bins(points_);
  double lo = points_.front();
  double hi = points_.back();
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  return histogram(lo, hi, bins);
}

Histogram EmpiricalDistribution::histogram(double lo, double hi, std::size_t bins) const {
  if (bins == 0 || !(hi > lo)) throw ValidationError("histogram: need bins > 0 and hi > lo");
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : points_) {
    if (v < lo || v > hi) continue;
    auto b = static_cast<std::size_t>((v - lo) / width);
    h.counts[std::min(b, bins - 1)] += 1;
  }
  return h;
}

EmpiricalDistribution esd(const Spectrum& s) {
  return EmpiricalDistribution({s.eigenvalues().begin(), s.eigenvalues().end()});
}

double ks_distance(const EmpiricalDistribution& e, const MPLaw& law) {
  auto gap_at = [&](double x) {
    return std::max(std::abs(e.cdf(x) - law.cdf(x)), std::abs(e.cdf_left(x) - law.cdf_left(x)));
  };
  double sup = 0.0;
  for (double x : e.support()) sup = std::max(sup, gap_at(x));
  if (law.atom_mass() > 0.0) sup = std::max(sup, gap_at(law.atom_location()));
  return sup;
}

double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  auto gap_at = [&](double x) {
    return std::max(std::abs(a.cdf(x) - b.cdf(x)), std::abs(a.cdf_left(x) - b.cdf_left(x)));
  };
  double sup = 0.0;
  for (double x : a.support()) sup = std::max(sup, gap_at(x));
  for (double x : b.support()) sup = std::max(sup, gap_at(x));
  return sup;
}

std::complex<double> stieltjes_empirical(const Spectrum& s, std::complex<double> z) {
  if (std::abs(z.imag()) < kMinImagPart) {
    throw ValidationError("stieltjes_empirical: z is too close to the real axis");
  }
  std::complex<double> sum = 0.0;
  for (double v : s.eigenvalues()) sum += 1.0 / (z - v);
  return sum / static_cast<double>(s.size());
}

Eigen::MatrixXcd resolvent(const SymmetricMatrix& m, std::complex<double> z) {
  if (std::abs(z.imag()) < kMinImagPart) {
    throw ValidationError("resolvent: z is too close to the real axis");
  }
  const auto n = static_cast<Eigen::Index>(m.order());
  Eigen::MatrixXcd shifted = -m.to_dense().cast<std::complex<double>>();
  shifted.diagonal().array() += z;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
  Eigen::MatrixXcd g = lu.solve(Eigen::MatrixXcd::Identity(n, n));
  if (!g.allFinite()) throw NumericalError("resolvent: factorization failed");
  return g;
}

}  // namespace kendall_lab
