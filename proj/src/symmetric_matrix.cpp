#include "kendall_lab/symmetric_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "kendall_lab/errors.hpp"

namespace kendall_lab {

SymmetricMatrix::SymmetricMatrix(std::size_t order, double fill)
    : order_(order), packed_(packed_size(order), fill) {}

SymmetricMatrix SymmetricMatrix::from_lower(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols()) {
    throw ValidationError("SymmetricMatrix: source matrix is not square");
  }
  const auto order = static_cast<std::size_t>(dense.rows());
  SymmetricMatrix out(order);
  for (std::size_t i = 0; i < order; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      out(i, j) = dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t order) {
  SymmetricMatrix out(order);
  for (std::size_t i = 0; i < order; ++i) out(i, i) = 1.0;
  return out;
}

SymmetricMatrix SymmetricMatrix::from_packed(std::size_t order, std::vector<double> packed) {
  if (packed.size() != packed_size(order)) {
    throw ValidationError("SymmetricMatrix: packed triangle has wrong length");
  }
  SymmetricMatrix out;
  out.order_ = order;
  out.packed_ = std::move(packed);
  return out;
}

Eigen::MatrixXd SymmetricMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(order_);
  Eigen::MatrixXd dense(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      dense(i, j) = v;
      dense(j, i) = v;
    }
  }
  return dense;
}

double SymmetricMatrix::trace() const noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < order_; ++i) sum += (*this)(i, i);
  return sum;
}

double SymmetricMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : packed_) m = std::max(m, std::abs(v));
  return m;
}

bool SymmetricMatrix::all_finite() const noexcept {
  return std::all_of(packed_.begin(), packed_.end(), [](double v) { return std::isfinite(v); });
}

SymmetricMatrix& SymmetricMatrix::operator+=(const SymmetricMatrix& other) {
  if (other.order_ != order_) throw ValidationError("SymmetricMatrix: order mismatch");
  for (std::size_t s = 0; s < packed_.size(); ++s) packed_[s] += other.packed_[s];
  return *this;
}

SymmetricMatrix& SymmetricMatrix::operator-=(const SymmetricMatrix& other) {
  if (other.order_ != order_) throw ValidationError("SymmetricMatrix: order mismatch");
  for (std::size_t s = 0; s < packed_.size(); ++s) packed_[s] -= other.packed_[s];
  return *this;
}

double max_abs_diff(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.order_ != b.order_) throw ValidationError("SymmetricMatrix: order mismatch");
  double m = 0.0;
  for (std::size_t s = 0; s < a.packed_.size(); ++s) {
    m = std::max(m, std::abs(a.packed_[s] - b.packed_[s]));
  }
  return m;
}

}  // namespace kendall_lab
