#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "kendall_lab/datagen.hpp"
#include "kendall_lab/laws.hpp"
#include "kendall_lab/spectral.hpp"
#include "kendall_lab/symmetric_matrix.hpp"

namespace kendall_lab::io {

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

/// Writes to a sibling temporary file, then renames over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Row-major CSV, one variable per line, headed by
/// `# p=<p> n=<n> marginal=<tag> seed=<seed>` and, if given, `# config=<json>`.
std::string data_csv(const DataMatrix& x, const nlohmann::json& config = nullptr);
/// Comment lines are skipped except the size/marginal header, which restores
/// the marginal and seed. Files without it load as `external` data.
DataMatrix parse_data_csv(std::string_view text);

/// Full p x p matrix, one row per line.
std::string symmetric_csv(const SymmetricMatrix& m, const nlohmann::json& config = nullptr);

/// Binary lower triangle: magic "SYMM", u64 order, then order(order+1)/2
/// little-endian f64 values, row-major.
std::string symmetric_binary(const SymmetricMatrix& m);
SymmetricMatrix parse_symmetric_binary(std::string_view bytes);

/// One eigenvalue per line after `# n=.. p=.. q=.. q_prime=.. source=..`.
std::string spectrum_csv(const Spectrum& s, const nlohmann::json& config = nullptr);
Spectrum parse_spectrum_csv(std::string_view text);

/// {edges:[], counts:[], n, p, q, q_prime, source}
nlohmann::json histogram_json(const Histogram& h, const SpectrumMeta& meta);

/// CSV `lambda,density,cdf` on `points` evenly spaced abscissae covering the
/// support (and the atom, when present).
std::string law_grid_csv(const MPLaw& law, std::size_t points = 400);

}  // namespace kendall_lab::io
