#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace kendall_lab {

/// Distribution of every entry of a synthetic data matrix.
///
/// `external` tags data that was loaded from a file; its law is unknown,
/// so it has no closed-form CDF.
enum class Marginal { uniform01, standard_gaussian, standard_cauchy, external };

std::string_view to_string(Marginal m) noexcept;
Marginal parse_marginal(std::string_view tag);

bool has_closed_form_cdf(Marginal m) noexcept;

/// CDF of the marginal. Throws ValidationError for `external`.
double marginal_cdf(Marginal m, double x);

/// p x n matrix of observations: rows are variables, columns are samples.
///
/// Construction rejects p < 1, n < 2, non-finite values and ties within a row.
class DataMatrix {
 public:
  DataMatrix(std::size_t p, std::size_t n, std::vector<double> values, Marginal marginal,
             std::uint64_t seed = 0);

  std::size_t p() const noexcept { return p_; }
  std::size_t n() const noexcept { return n_; }
  Marginal marginal() const noexcept { return marginal_; }
  std::uint64_t seed() const noexcept { return seed_; }

  double operator()(std::size_t k, std::size_t i) const noexcept { return values_[k * n_ + i]; }
  std::span<const double> row(std::size_t k) const noexcept {
    return {values_.data() + k * n_, n_};
  }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const DataMatrix&) const = default;

 private:
  std::size_t p_;
  std::size_t n_;
  std::vector<double> values_;
  Marginal marginal_;
  std::uint64_t seed_;
};

/// Seed of the independent mt19937_64 stream used for row `row`.
///
/// splitmix64 applied to the master seed, offset by the row index, and mixed
/// again. Rows never share a stream, so generation is row-parallel.
std::uint64_t row_stream_seed(std::uint64_t seed, std::size_t row) noexcept;

/// One draw from the marginal using the generator's raw 64-bit output.
/// Uniforms use the top 53 bits on the open interval (0, 1); Gaussians use
/// Box-Muller (cosine branch); Cauchy uses the inverse CDF.
double draw_marginal(Marginal m, std::mt19937_64& rng);

/// Maximum redraws of a single tied entry before generation fails.
inline constexpr int kTieRetryCap = 100;

/// Draws every entry independently from `marginal`.
///
/// Deterministic in (p, n, marginal, seed) and independent of `threads`.
DataMatrix generate(std::size_t p, std::size_t n, Marginal marginal, std::uint64_t seed,
                    unsigned threads = 1);

}  // namespace kendall_lab
