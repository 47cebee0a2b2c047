#include "kendall_lab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "kendall_lab/errors.hpp"
#include "kendall_lab/parallel.hpp"

namespace kendall_lab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform on the open interval (0, 1) from the top 53 bits.
double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double draw_marginal(Marginal m, std::mt19937_64& rng) {
  switch (m) {
    case Marginal::uniform01:
      return open_unit(rng);
    case Marginal::standard_gaussian: {
      // Box-Muller, cosine branch only.
      const double u1 = open_unit(rng);
      const double u2 = open_unit(rng);
      return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    case Marginal::standard_cauchy:
      return std::tan(std::numbers::pi * (open_unit(rng) - 0.5));
    case Marginal::external:
      break;
  }
  throw ValidationError("generate: cannot sample from an external marginal");
}

namespace {

// Index of some entry that ties with another entry of the row, or n if none.
std::size_t find_tie(std::span<const double> row, std::vector<std::size_t>& order) {
  order.resize(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return row[a] < row[b] || (row[a] == row[b] && a < b);
  });
  for (std::size_t t = 1; t < order.size(); ++t) {
    if (row[order[t]] == row[order[t - 1]]) return order[t];
  }
  return row.size();
}

}  // namespace

std::string_view to_string(Marginal m) noexcept {
  switch (m) {
    case Marginal::uniform01: return "uniform01";
    case Marginal::standard_gaussian: return "standard_gaussian";
    case Marginal::standard_cauchy: return "standard_cauchy";
    case Marginal::external: return "external";
  }
  return "external";
}

Marginal parse_marginal(std::string_view tag) {
  if (tag == "uniform01" || tag == "uniform") return Marginal::uniform01;
  if (tag == "standard_gaussian" || tag == "gaussian") return Marginal::standard_gaussian;
  if (tag == "standard_cauchy" || tag == "cauchy") return Marginal::standard_cauchy;
  if (tag == "external") return Marginal::external;
  throw ValidationError("unknown marginal '" + std::string(tag) + "'");
}

bool has_closed_form_cdf(Marginal m) noexcept { return m != Marginal::external; }

double marginal_cdf(Marginal m, double x) {
  switch (m) {
    case Marginal::uniform01:
      return std::clamp(x, 0.0, 1.0);
    case Marginal::standard_gaussian:
      return 0.5 * std::erfc(-x / std::numbers::sqrt2);
    case Marginal::standard_cauchy:
      return 0.5 + std::atan(x) / std::numbers::pi;
    case Marginal::external:
      break;
  }
  throw ValidationError("marginal_cdf: data with an external marginal has no closed-form CDF");
}

DataMatrix::DataMatrix(std::size_t p, std::size_t n, std::vector<double> values, Marginal marginal,
                       std::uint64_t seed)
    : p_(p), n_(n), values_(std::move(values)), marginal_(marginal), seed_(seed) {
  if (p_ < 1) throw ValidationError("DataMatrix: need p >= 1");
  if (n_ < 2) throw ValidationError("DataMatrix: need n >= 2");
  if (values_.size() != p_ * n_) throw ValidationError("DataMatrix: value count is not p*n");
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < p_; ++k) {
    for (double v : row(k)) {
      if (!std::isfinite(v)) throw ValidationError("DataMatrix: non-finite value");
    }
    if (find_tie(row(k), order) != n_) {
      throw ValidationError("DataMatrix: tie in row " + std::to_string(k));
    }
  }
}

std::uint64_t row_stream_seed(std::uint64_t seed, std::size_t row) noexcept {
  return splitmix64(splitmix64(seed) + static_cast<std::uint64_t>(row));
}

DataMatrix generate(std::size_t p, std::size_t n, Marginal marginal, std::uint64_t seed,
                    unsigned threads) {
  if (p < 1) throw ValidationError("generate: need p >= 1");
  if (n < 2) throw ValidationError("generate: need n >= 2");
  if (marginal == Marginal::external) {
    throw ValidationError("generate: cannot sample from an external marginal");
  }
  std::vector<double> values(p * n);
  parallel_for(p, threads, [&](std::size_t k) {
    std::mt19937_64 rng(row_stream_seed(seed, k));
    std::span<double> row(values.data() + k * n, n);
    for (auto& v : row) v = draw_marginal(marginal, rng);
    std::vector<std::size_t> order;
    std::vector<int> redraws(n, 0);
    for (std::size_t tied = find_tie(row, order); tied != n; tied = find_tie(row, order)) {
      if (++redraws[tied] > kTieRetryCap) {
        throw NumericalError("generate: tie persisted after " + std::to_string(kTieRetryCap) +
                             " redraws in row " + std::to_string(k));
      }
      row[tied] = draw_marginal(marginal, rng);
    }
  });
  return DataMatrix(p, n, std::move(values), marginal, seed);
}

}  // namespace kendall_lab
