#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "kendall_lab/datagen.hpp"

namespace kendall_lab::testing {

// p rows of n values each, loaded as file data.
inline DataMatrix rows(std::vector<std::vector<double>> r, Marginal marginal = Marginal::external) {
  const std::size_t p = r.size();
  const std::size_t n = r.front().size();
  std::vector<double> flat;
  for (const auto& row : r) flat.insert(flat.end(), row.begin(), row.end());
  return DataMatrix(p, n, std::move(flat), marginal, 0);
}

// Independent Kendall oracle: integer concordance count over all sample pairs.
inline double kendall_oracle(std::span<const double> a, std::span<const double> b) {
  std::int64_t s = 0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int sa = a[i] > a[j] ? 1 : -1;
      const int sb = b[i] > b[j] ? 1 : -1;
      s += sa * sb;
    }
  }
  return static_cast<double>(s) / static_cast<double>(n * (n - 1) / 2);
}

}  // namespace kendall_lab::testing
