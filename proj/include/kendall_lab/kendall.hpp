#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kendall_lab/datagen.hpp"
#include "kendall_lab/symmetric_matrix.hpp"

namespace kendall_lab {

/// Number of sample pairs, M = n(n-1)/2.
constexpr std::size_t pair_count(std::size_t n) noexcept { return n * (n - 1) / 2; }

/// Sample pair (i, j) with i < j, zero-based.
struct PairIndex {
  std::size_t i;
  std::size_t j;
  bool operator==(const PairIndex&) const = default;
};

/// Column position of (i, j) in lexicographic order (0,1), (0,2), ..., (0,n-1), (1,2), ...
std::size_t pair_position(PairIndex pair, std::size_t n);
PairIndex pair_at(std::size_t position, std::size_t n);

/// Default ceiling on p*M sign entries that may be materialized.
inline constexpr std::size_t kDefaultSignBudget = 2'000'000'000;

/// p x M grid of sign(x_ki - x_kj) in {-1, +1}, columns in pair order.
class PairSignMatrix {
 public:
  PairSignMatrix(std::size_t p, std::size_t n, std::vector<std::int8_t> signs);

  std::size_t p() const noexcept { return p_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t pairs() const noexcept { return pair_count(n_); }

  std::int8_t operator()(std::size_t k, std::size_t position) const noexcept {
    return signs_[k * pairs() + position];
  }
  std::span<const std::int8_t> row(std::size_t k) const noexcept {
    return {signs_.data() + k * pairs(), pairs()};
  }

 private:
  std::size_t p_;
  std::size_t n_;
  std::vector<std::int8_t> signs_;
};

/// Throws ValidationError when p*M exceeds `budget`; use tau_fast, which
/// streams over pairs without materializing the grid.
PairSignMatrix pair_signs(const DataMatrix& x, std::size_t budget = kDefaultSignBudget);

/// O(p^2 n^2) double loop over sample pairs; integer concordance counts divided by M once.
SymmetricMatrix tau_naive(const DataMatrix& x, unsigned threads = 1);

/// Merge-sort inversion counting, O(p^2 n log n). Bit-identical to tau_naive.
SymmetricMatrix tau_fast(const DataMatrix& x, unsigned threads = 1);

/// (1/M) S S^T with integer accumulation. Bit-identical to tau_naive.
SymmetricMatrix tau_from_signs(const PairSignMatrix& signs, unsigned threads = 1);

/// Number of inversions of `seq`; sorts `seq` in place using `scratch`.
std::uint64_t count_inversions(std::span<std::uint32_t> seq, std::span<std::uint32_t> scratch);

}  // namespace kendall_lab
