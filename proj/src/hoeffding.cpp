#include "kendall_lab/hoeffding.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "kendall_lab/errors.hpp"
#include "kendall_lab/kendall.hpp"

namespace kendall_lab {

namespace {

constexpr double kPi = std::numbers::pi;

using Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

// Gram matrix (1/denominator) rows * rows^T, lower triangle only.
SymmetricMatrix gram(const Eigen::MatrixXd& rows, double denominator) {
  const Index p = rows.rows();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
  g.selfadjointView<Eigen::Lower>().rankUpdate(rows);
  SymmetricMatrix out(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j <= i; ++j) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = g(i, j) / denominator;
    }
  }
  return out;
}

}  // namespace

Kernel::Kernel(std::string name, Function phi, double bound)
    : Kernel(std::move(name), std::move(phi), bound, Builtin::none) {}

Kernel::Kernel(std::string name, Function phi, double bound, Builtin builtin)
    : name_(std::move(name)), phi_(std::move(phi)), bound_(bound), builtin_(builtin) {
  if (!phi_) throw ValidationError("Kernel: empty function");
  if (!(bound_ > 0.0) || !std::isfinite(bound_)) throw ValidationError("Kernel: need a finite bound");
}

Kernel Kernel::sign() {
  return Kernel(
      "sign", [](double x, double y) { return x > y ? 1.0 : (x < y ? -1.0 : 0.0); }, 1.0,
      Builtin::sign);
}

Kernel Kernel::sine() {
  return Kernel(
      "sine", [](double x, double y) { return std::sin(kPi * (x - y)); }, 1.0, Builtin::sine);
}

Kernel Kernel::additive() {
  return Kernel(
      "additive", [](double x, double y) { return std::atan(x) - std::atan(y); }, kPi,
      Builtin::additive);
}

Kernel Kernel::parse(std::string_view tag) {
  if (tag == "sign") return sign();
  if (tag == "sine") return sine();
  if (tag == "additive") return additive();
  throw ValidationError("unknown kernel '" + std::string(tag) + "'");
}

std::optional<double> Kernel::conditional_mean(double x, Marginal marginal) const {
  switch (builtin_) {
    case Builtin::sign:
      if (!has_closed_form_cdf(marginal)) return std::nullopt;
      return 2.0 * marginal_cdf(marginal, x) - 1.0;
    case Builtin::sine:
      // int_0^1 sin(pi (x - y)) dy = -2 cos(pi x) / pi
      if (marginal != Marginal::uniform01) return std::nullopt;
      return -2.0 * std::cos(kPi * x) / kPi;
    case Builtin::additive: {
      double mean_atan = 0.0;
      switch (marginal) {
        case Marginal::uniform01:
          mean_atan = kPi / 4.0 - std::numbers::ln2 / 2.0;
          break;
        case Marginal::standard_gaussian:
        case Marginal::standard_cauchy:
          mean_atan = 0.0;  // symmetric about 0
          break;
        case Marginal::external:
          return std::nullopt;
      }
      return std::atan(x) - mean_atan;
    }
    case Builtin::none:
      break;
  }
  return std::nullopt;
}

void check_kernel(const Kernel& kernel, Marginal marginal, std::uint64_t seed, int trials) {
  std::mt19937_64 rng(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  for (int t = 0; t < trials; ++t) {
    const double x = draw_marginal(marginal, rng);
    const double y = draw_marginal(marginal, rng);
    const double forward = kernel(x, y);
    const double backward = kernel(y, x);
    if (std::abs(forward + backward) > 1e-12) {
      throw ValidationError("kernel '" + kernel.name() + "' is not antisymmetric");
    }
    if (!(std::abs(forward) <= kernel.bound())) {
      throw ValidationError("kernel '" + kernel.name() + "' exceeds its declared bound");
    }
  }
}

std::string_view to_string(ProjectionMode m) noexcept {
  return m == ProjectionMode::exact_cdf ? "exact_cdf" : "empirical_rank";
}

ProjectionMode parse_mode(std::string_view tag) {
  if (tag == "exact_cdf" || tag == "exact") return ProjectionMode::exact_cdf;
  if (tag == "empirical_rank" || tag == "rank") return ProjectionMode::empirical_rank;
  throw ValidationError("unknown projection mode '" + std::string(tag) + "'");
}

Eigen::MatrixXd kernel_values(const DataMatrix& x, const Kernel& kernel) {
  const std::size_t n = x.n();
  Eigen::MatrixXd phi(idx(x.p()), idx(pair_count(n)));
  for (std::size_t k = 0; k < x.p(); ++k) {
    const auto row = x.row(k);
    Index c = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) phi(idx(k), c++) = kernel(row[i], row[j]);
    }
  }
  return phi;
}

HoeffdingParts hoeffding_parts(const DataMatrix& x, ProjectionMode mode, const Kernel& kernel) {
  const std::size_t p = x.p();
  const std::size_t n = x.n();
  HoeffdingParts parts;
  parts.mode = mode;
  parts.u.resize(idx(p), idx(n));
  parts.vbar.resize(idx(p), idx(pair_count(n)));

  for (std::size_t k = 0; k < p; ++k) {
    const auto row = x.row(k);
    if (mode == ProjectionMode::exact_cdf) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto mean = kernel.conditional_mean(row[i], x.marginal());
        if (!mean) {
          throw ValidationError("hoeffding_parts: no closed-form conditional mean for kernel '" +
                                kernel.name() + "' under marginal " +
                                std::string(to_string(x.marginal())));
        }
        parts.u(idx(k), idx(i)) = *mean;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) sum += kernel(row[i], row[j]);
        }
        parts.u(idx(k), idx(i)) = sum / static_cast<double>(n - 1);
      }
    }
    Index c = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        parts.vbar(idx(k), c++) =
            kernel(row[i], row[j]) - parts.u(idx(k), idx(i)) + parts.u(idx(k), idx(j));
      }
    }
  }
  return parts;
}

SymmetricMatrix h_matrix(const HoeffdingParts& parts) {
  return gram(parts.vbar, static_cast<double>(parts.pairs()));
}

SymmetricMatrix tau_kernel(const DataMatrix& x, const Kernel& kernel) {
  return gram(kernel_values(x, kernel), static_cast<double>(pair_count(x.n())));
}

SymmetricMatrix remainder_projector_pairwise(const HoeffdingParts& parts) {
  const std::size_t n = parts.n();
  Eigen::MatrixXd diffs(idx(parts.p()), idx(parts.pairs()));
  Index c = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) diffs.col(c++) = parts.u.col(idx(i)) - parts.u.col(idx(j));
  }
  return gram(diffs, static_cast<double>(parts.pairs()));
}

SymmetricMatrix remainder_projector_centered(const HoeffdingParts& parts) {
  const double n = static_cast<double>(parts.n());
  Eigen::MatrixXd centered = parts.u.colwise() - parts.u.rowwise().mean();
  return gram(centered, (n - 1.0) / 2.0);
}

SymmetricMatrix a_matrix(const DataMatrix& x, const HoeffdingParts& parts) {
  if (x.p() != parts.p() || x.n() != parts.n()) {
    throw ValidationError("a_matrix: data and decomposition sizes differ");
  }
  const std::size_t n = parts.n();
  const Index p = idx(parts.p());
  // W_i = sum_{j>i} Vbar_(ij) - sum_{j<i} Vbar_(ji), so B = (1/M) W U^T.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, idx(n));
  Index c = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++c) {
      w.col(idx(i)) += parts.vbar.col(c);
      w.col(idx(j)) -= parts.vbar.col(c);
    }
  }
  const Eigen::MatrixXd b = (w * parts.u.transpose()) / static_cast<double>(parts.pairs());
  SymmetricMatrix a = remainder_projector_centered(parts);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j <= i; ++j) {
      a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) += b(i, j) + b(j, i);
    }
  }
  return a;
}

AlphaEstimate alpha_coefficient(const Kernel& kernel, Marginal marginal, std::uint64_t seed,
                                const AlphaOptions& options) {
  if (options.samples < 10'000) throw ValidationError("alpha_coefficient: need at least 10^4 samples");
  if (options.inner_samples < 2) throw ValidationError("alpha_coefficient: need inner_samples >= 2");
  if (marginal == Marginal::external) {
    throw ValidationError("alpha_coefficient: cannot sample an external marginal");
  }
  check_kernel(kernel, marginal, seed);

  std::mt19937_64 rng(seed);
  const bool closed = options.prefer_closed_form && kernel.conditional_mean(0.5, marginal).has_value();

  // Conditional mean u(x) = E[phi(x, Y)] with its sampling variance.
  auto inner = [&](double x) -> std::pair<double, double> {
    if (closed) return {*kernel.conditional_mean(x, marginal), 0.0};
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t s = 0; s < options.inner_samples; ++s) {
      const double v = kernel(x, draw_marginal(marginal, rng));
      sum += v;
      sum_sq += v * v;
    }
    const double m = static_cast<double>(options.inner_samples);
    const double mean = sum / m;
    const double var = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
    return {mean, var / m};
  };

  double total = 0.0, total_sq = 0.0;
  for (std::size_t s = 0; s < options.samples; ++s) {
    const double x1 = draw_marginal(marginal, rng);
    const double x2 = draw_marginal(marginal, rng);
    const auto [u1, noise1] = inner(x1);
    const auto [u2, noise2] = inner(x2);
    const double residual = kernel(x1, x2) - u1 + u2;
    const double term = residual * residual - noise1 - noise2;
    total += term;
    total_sq += term * term;
  }
  const double count = static_cast<double>(options.samples);
  const double mean = total / count;
  const double var = std::max(0.0, (total_sq - count * mean * mean) / (count - 1.0));
  return {mean, std::sqrt(var / count), options.samples, closed};
}

}  // namespace kendall_lab
