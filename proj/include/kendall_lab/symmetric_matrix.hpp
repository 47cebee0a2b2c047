#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace kendall_lab {

/// Dense real symmetric matrix holding only its lower triangle.
///
/// The triangle is packed row-major: row i contributes entries (i,0)..(i,i).
/// Symmetry is exact because (i,j) and (j,i) share one storage slot.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t order, double fill = 0.0);

  /// Copies the lower triangle of a square matrix; the upper triangle is ignored.
  static SymmetricMatrix from_lower(const Eigen::MatrixXd& dense);
  static SymmetricMatrix identity(std::size_t order);
  static SymmetricMatrix from_packed(std::size_t order, std::vector<double> packed);

  std::size_t order() const noexcept { return order_; }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    return packed_[slot(i, j)];
  }
  double& operator()(std::size_t i, std::size_t j) noexcept {
    return packed_[slot(i, j)];
  }

  std::span<const double> packed() const noexcept { return packed_; }

  Eigen::MatrixXd to_dense() const;

  double trace() const noexcept;
  double max_abs() const noexcept;
  bool all_finite() const noexcept;

  SymmetricMatrix& operator+=(const SymmetricMatrix& other);
  SymmetricMatrix& operator-=(const SymmetricMatrix& other);
  friend SymmetricMatrix operator+(SymmetricMatrix lhs, const SymmetricMatrix& rhs) {
    return lhs += rhs;
  }
  friend SymmetricMatrix operator-(SymmetricMatrix lhs, const SymmetricMatrix& rhs) {
    return lhs -= rhs;
  }

  /// Largest entrywise absolute difference; orders must match.
  friend double max_abs_diff(const SymmetricMatrix& a, const SymmetricMatrix& b);

  bool operator==(const SymmetricMatrix&) const = default;

  static constexpr std::size_t packed_size(std::size_t order) noexcept {
    return order * (order + 1) / 2;
  }

 private:
  static constexpr std::size_t slot(std::size_t i, std::size_t j) noexcept {
    return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
  }

  std::size_t order_ = 0;
  std::vector<double> packed_;
};

}  // namespace kendall_lab
