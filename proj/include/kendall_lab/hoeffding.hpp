#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "kendall_lab/datagen.hpp"
#include "kendall_lab/symmetric_matrix.hpp"

namespace kendall_lab {

/// Bounded antisymmetric pair kernel phi(x, y) = -phi(y, x).
///
/// Built-ins:
///   sign      sign(x - y)
///   sine      sin(pi (x - y))
///   additive  atan(x) - atan(y), whose Hoeffding residual vanishes identically
class Kernel {
 public:
  using Function = std::function<double(double, double)>;

  static Kernel sign();
  static Kernel sine();
  static Kernel additive();
  static Kernel parse(std::string_view tag);

  /// Arbitrary kernel; no closed-form conditional means.
  Kernel(std::string name, Function phi, double bound);

  const std::string& name() const noexcept { return name_; }
  double bound() const noexcept { return bound_; }
  double operator()(double x, double y) const { return phi_(x, y); }

  /// E[phi(x, Y)] for Y drawn from `marginal`, when known in closed form.
  std::optional<double> conditional_mean(double x, Marginal marginal) const;

 private:
  enum class Builtin { none, sign, sine, additive };
  Kernel(std::string name, Function phi, double bound, Builtin builtin);

  std::string name_;
  Function phi_;
  double bound_;
  Builtin builtin_ = Builtin::none;
};

/// Throws ValidationError unless |phi(x,y) + phi(y,x)| <= 1e-12 and
/// |phi| <= bound on `trials` pseudo-random points drawn from `marginal`.
void check_kernel(const Kernel& kernel, Marginal marginal, std::uint64_t seed, int trials = 256);

enum class ProjectionMode { exact_cdf, empirical_rank };

std::string_view to_string(ProjectionMode m) noexcept;
ProjectionMode parse_mode(std::string_view tag);

/// Hoeffding split of the kernel values,
///   phi(x_ki, x_kj) = u_ki - u_kj + vbar_k,(ij).
///
/// exact_cdf:      u_ki = E[phi(x_ki, Y)] in closed form (2F(x) - 1 for sign).
/// empirical_rank: u_ki = (1/(n-1)) sum_{j != i} phi(x_ki, x_kj), which for the
///                 sign kernel is (2 rank - n - 1)/(n - 1).
struct HoeffdingParts {
  Eigen::MatrixXd u;     // p x n
  Eigen::MatrixXd vbar;  // p x M, columns in pair order
  ProjectionMode mode = ProjectionMode::exact_cdf;

  std::size_t p() const noexcept { return static_cast<std::size_t>(u.rows()); }
  std::size_t n() const noexcept { return static_cast<std::size_t>(u.cols()); }
  std::size_t pairs() const noexcept { return static_cast<std::size_t>(vbar.cols()); }
};

/// p x M matrix of phi(x_ki, x_kj) in pair order.
Eigen::MatrixXd kernel_values(const DataMatrix& x, const Kernel& kernel);

/// Throws ValidationError when exact_cdf is requested without a closed-form
/// conditional mean (e.g. external data).
HoeffdingParts hoeffding_parts(const DataMatrix& x, ProjectionMode mode,
                               const Kernel& kernel = Kernel::sign());

/// H = (1/M) Vbar Vbar^T.
SymmetricMatrix h_matrix(const HoeffdingParts& parts);

/// (1/M) Phi Phi^T for a general kernel. For the sign kernel every sum is an
/// exact integer, so this reproduces the Kendall matrix bit for bit.
SymmetricMatrix tau_kernel(const DataMatrix& x, const Kernel& kernel);

/// sum_{i<j} (1/M)(U_i - U_j)(U_i - U_j)^T, accumulated pair by pair.
SymmetricMatrix remainder_projector_pairwise(const HoeffdingParts& parts);
/// The same sum as (2/(n-1)) sum_i (U_i - <U>)(U_i - <U>)^T.
SymmetricMatrix remainder_projector_centered(const HoeffdingParts& parts);

/// tau - H assembled from the decomposition: the centered projector sum plus
/// B + B^T with B = (1/M) sum_{i<j} Vbar_(ij) (U_i - U_j)^T. Rank <= 3n - 1.
SymmetricMatrix a_matrix(const DataMatrix& x, const HoeffdingParts& parts);

struct AlphaOptions {
  std::size_t samples = 100'000;
  std::size_t inner_samples = 2048;
  bool prefer_closed_form = true;
};

struct AlphaEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
  bool closed_form_inner = false;
};

/// Monte-Carlo estimate of alpha = E[(phi(x1,x2) - E[phi|x1] - E[phi|x2])^2].
///
/// Inner expectations use the kernel's closed form when available (and
/// preferred); otherwise each is an inner Monte-Carlo mean of size
/// `inner_samples`, and the inner sampling variance is subtracted so the
/// estimator stays unbiased. Requires samples >= 10^4.
AlphaEstimate alpha_coefficient(const Kernel& kernel, Marginal marginal, std::uint64_t seed,
                                const AlphaOptions& options = {});

}  // namespace kendall_lab
