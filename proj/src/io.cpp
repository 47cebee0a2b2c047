#include "kendall_lab/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "kendall_lab/errors.hpp"

namespace kendall_lab::io {

namespace {

constexpr std::string_view kMagic = "SYMM";

void append_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint64_t read_u64(std::string_view bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
  }
  return v;
}

void append_config(std::string& out, const nlohmann::json& config) {
  if (!config.is_null()) out += "# config=" + config.dump() + "\n";
}

double parse_number(std::string_view token) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) {
    token.remove_suffix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ValidationError("cannot parse number '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

// Value of `key=` inside a header line, if present.
std::string header_field(std::string_view line, std::string_view key) {
  const std::string needle = std::string(key) + "=";
  for (auto token : split(line, ' ')) {
    if (token.starts_with(needle)) return std::string(token.substr(needle.size()));
  }
  return {};
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw NumericalError("format_double failed");
  return {buf.data(), ptr};
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw ValidationError("cannot create directory " + path.parent_path().string());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ValidationError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ValidationError("cannot rename " + tmp.string() + " to " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string data_csv(const DataMatrix& x, const nlohmann::json& config) {
  std::string out = "# p=" + std::to_string(x.p()) + " n=" + std::to_string(x.n()) +
                    " marginal=" + std::string(to_string(x.marginal())) +
                    " seed=" + std::to_string(x.seed()) + "\n";
  append_config(out, config);
  for (std::size_t k = 0; k < x.p(); ++k) {
    const auto row = x.row(k);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

DataMatrix parse_data_csv(std::string_view text) {
  Marginal marginal = Marginal::external;
  std::uint64_t seed = 0;
  std::vector<double> values;
  std::size_t p = 0, n = 0;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto tag = header_field(line, "marginal");
      if (!tag.empty()) marginal = parse_marginal(tag);
      const auto s = header_field(line, "seed");
      if (!s.empty()) seed = std::stoull(s);
      continue;
    }
    const auto fields = split(line, ',');
    if (n == 0) n = fields.size();
    if (fields.size() != n) throw ValidationError("data CSV: ragged row " + std::to_string(p + 1));
    for (auto f : fields) values.push_back(parse_number(f));
    ++p;
  }
  return DataMatrix(p, n, std::move(values), marginal, seed);
}

std::string symmetric_csv(const SymmetricMatrix& m, const nlohmann::json& config) {
  std::string out = "# order=" + std::to_string(m.order()) + "\n";
  append_config(out, config);
  for (std::size_t i = 0; i < m.order(); ++i) {
    for (std::size_t j = 0; j < m.order(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string symmetric_binary(const SymmetricMatrix& m) {
  std::string out(kMagic);
  append_u64(out, m.order());
  for (double v : m.packed()) append_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

SymmetricMatrix parse_symmetric_binary(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != kMagic) {
    throw ValidationError("symmetric binary: missing SYMM magic");
  }
  const std::uint64_t order = read_u64(bytes, 4);
  const std::size_t count = SymmetricMatrix::packed_size(order);
  if (bytes.size() != 12 + 8 * count) throw ValidationError("symmetric binary: truncated payload");
  std::vector<double> packed(count);
  for (std::size_t s = 0; s < count; ++s) {
    packed[s] = std::bit_cast<double>(read_u64(bytes, 12 + 8 * s));
  }
  return SymmetricMatrix::from_packed(order, std::move(packed));
}

std::string spectrum_csv(const Spectrum& s, const nlohmann::json& config) {
  const auto& meta = s.meta();
  std::string out = "# n=" + std::to_string(meta.n) + " p=" + std::to_string(meta.p) +
                    " q=" + format_double(meta.q()) + " q_prime=" + format_double(meta.q_prime()) +
                    " source=" + std::string(to_string(meta.source)) + "\n";
  append_config(out, config);
  for (double v : s.eigenvalues()) out += format_double(v) + "\n";
  return out;
}

Spectrum parse_spectrum_csv(std::string_view text) {
  SpectrumMeta meta;
  std::vector<double> values;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (auto v = header_field(line, "n"); !v.empty()) meta.n = std::stoull(v);
      if (auto v = header_field(line, "p"); !v.empty()) meta.p = std::stoull(v);
      if (auto v = header_field(line, "source"); !v.empty()) meta.source = parse_source(v);
      continue;
    }
    values.push_back(parse_number(line));
  }
  return Spectrum(std::move(values), meta);
}

nlohmann::json histogram_json(const Histogram& h, const SpectrumMeta& meta) {
  return {{"edges", h.edges},
          {"counts", h.counts},
          {"n", meta.n},
          {"p", meta.p},
          {"q", meta.q()},
          {"q_prime", meta.q_prime()},
          {"source", std::string(to_string(meta.source))}};
}

std::string law_grid_csv(const MPLaw& law, std::size_t points) {
  if (points < 2) throw ValidationError("law grid: need at least 2 points");
  double lo = law.lower_edge();
  double hi = law.upper_edge();
  if (law.atom_mass() > 0.0) lo = std::min(lo, law.atom_location());
  const double pad = 0.02 * (hi - lo);
  lo -= pad;
  hi += pad;
  std::string out = "lambda,density,cdf\n";
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    out += format_double(x) + "," + format_double(law.density(x)) + "," + format_double(law.cdf(x)) + "\n";
  }
  return out;
}

}  // namespace kendall_lab::io
