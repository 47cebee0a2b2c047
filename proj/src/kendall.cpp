#include "kendall_lab/kendall.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "kendall_lab/errors.hpp"
#include "kendall_lab/parallel.hpp"

namespace kendall_lab {

namespace {

// Rank (0-based) of every entry within its row.
std::vector<std::uint32_t> row_ranks(const DataMatrix& x) {
  const std::size_t n = x.n();
  std::vector<std::uint32_t> ranks(x.p() * n);
  std::vector<std::uint32_t> order(n);
  for (std::size_t k = 0; k < x.p(); ++k) {
    const auto row = x.row(k);
    std::iota(order.begin(), order.end(), 0U);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return row[a] < row[b]; });
    for (std::size_t r = 0; r < n; ++r) ranks[k * n + order[r]] = static_cast<std::uint32_t>(r);
  }
  return ranks;
}

double ratio(std::int64_t concordance, std::size_t pairs) {
  return static_cast<double>(concordance) / static_cast<double>(pairs);
}

}  // namespace

std::size_t pair_position(PairIndex pair, std::size_t n) {
  if (pair.i >= pair.j || pair.j >= n) throw ValidationError("pair_position: need i < j < n");
  // Pairs before row i: sum_{r<i} (n-1-r) = i(2n-i-1)/2.
  return pair.i * (2 * n - pair.i - 1) / 2 + (pair.j - pair.i - 1);
}

PairIndex pair_at(std::size_t position, std::size_t n) {
  if (position >= pair_count(n)) throw ValidationError("pair_at: position out of range");
  std::size_t i = 0;
  std::size_t row_len = n - 1;
  while (position >= row_len) {
    position -= row_len;
    ++i;
    --row_len;
  }
  return {i, i + 1 + position};
}

PairSignMatrix::PairSignMatrix(std::size_t p, std::size_t n, std::vector<std::int8_t> signs)
    : p_(p), n_(n), signs_(std::move(signs)) {
  if (n_ < 2 || p_ < 1) throw ValidationError("PairSignMatrix: need p >= 1 and n >= 2");
  if (signs_.size() != p_ * pairs()) throw ValidationError("PairSignMatrix: wrong entry count");
  for (auto s : signs_) {
    if (s != 1 && s != -1) throw ValidationError("PairSignMatrix: entries must be +1 or -1");
  }
}

PairSignMatrix pair_signs(const DataMatrix& x, std::size_t budget) {
  const std::size_t n = x.n();
  const std::size_t m = pair_count(n);
  if (x.p() > budget / m) {
    throw ValidationError("pair_signs: p*M = " + std::to_string(x.p()) + "*" + std::to_string(m) +
                          " exceeds the sign budget; use the streaming tau_fast path");
  }
  std::vector<std::int8_t> signs(x.p() * m);
  for (std::size_t k = 0; k < x.p(); ++k) {
    const auto row = x.row(k);
    std::size_t pos = k * m;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) signs[pos++] = row[i] > row[j] ? 1 : -1;
    }
  }
  return PairSignMatrix(x.p(), n, std::move(signs));
}

SymmetricMatrix tau_naive(const DataMatrix& x, unsigned threads) {
  const std::size_t p = x.p();
  const std::size_t n = x.n();
  const std::size_t m = pair_count(n);
  SymmetricMatrix tau(p);
  parallel_for(p, threads, [&](std::size_t k) {
    const auto rk = x.row(k);
    for (std::size_t l = 0; l <= k; ++l) {
      const auto rl = x.row(l);
      std::int64_t concordance = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const bool up_k = rk[i] > rk[j];
          const bool up_l = rl[i] > rl[j];
          concordance += up_k == up_l ? 1 : -1;
        }
      }
      tau(k, l) = ratio(concordance, m);
    }
  });
  return tau;
}

std::uint64_t count_inversions(std::span<std::uint32_t> seq, std::span<std::uint32_t> scratch) {
  const std::size_t n = seq.size();
  std::uint64_t inversions = 0;
  // Bottom-up merge sort; each merge counts pairs taken out of order.
  std::span<std::uint32_t> src = seq;
  std::span<std::uint32_t> dst = scratch.first(n);
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t a = lo, b = mid, out = lo;
      while (a < mid && b < hi) {
        if (src[b] < src[a]) {
          inversions += mid - a;
          dst[out++] = src[b++];
        } else {
          dst[out++] = src[a++];
        }
      }
      while (a < mid) dst[out++] = src[a++];
      while (b < hi) dst[out++] = src[b++];
    }
    std::swap(src, dst);
  }
  if (src.data() != seq.data()) std::copy(src.begin(), src.end(), seq.begin());
  return inversions;
}

SymmetricMatrix tau_fast(const DataMatrix& x, unsigned threads) {
  const std::size_t p = x.p();
  const std::size_t n = x.n();
  const std::size_t m = pair_count(n);
  const auto ranks = row_ranks(x);
  SymmetricMatrix tau(p);
  parallel_for(p, threads, [&](std::size_t k) {
    // Samples listed in increasing order of row k.
    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[ranks[k * n + i]] = static_cast<std::uint32_t>(i);
    std::vector<std::uint32_t> seq(n), scratch(n);
    for (std::size_t l = 0; l <= k; ++l) {
      for (std::size_t t = 0; t < n; ++t) seq[t] = ranks[l * n + order[t]];
      const auto discordant = static_cast<std::int64_t>(count_inversions(seq, scratch));
      tau(k, l) = ratio(static_cast<std::int64_t>(m) - 2 * discordant, m);
    }
  });
  return tau;
}

SymmetricMatrix tau_from_signs(const PairSignMatrix& signs, unsigned threads) {
  const std::size_t p = signs.p();
  const std::size_t m = signs.pairs();
  SymmetricMatrix tau(p);
  parallel_for(p, threads, [&](std::size_t k) {
    const auto sk = signs.row(k);
    for (std::size_t l = 0; l <= k; ++l) {
      const auto sl = signs.row(l);
      std::int64_t concordance = 0;
      for (std::size_t c = 0; c < m; ++c) concordance += sk[c] * sl[c];
      tau(k, l) = ratio(concordance, m);
    }
  });
  return tau;
}

}  // namespace kendall_lab
