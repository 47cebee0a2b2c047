#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kendall_lab/datagen.hpp"
#include "kendall_lab/hoeffding.hpp"
#include "kendall_lab/laws.hpp"

namespace kendall_lab {

/// Finite-size tolerances, calibrated at the sizes noted.
namespace tolerance {
inline constexpr double kQuadraticLsdKs = 0.05;   // H vs (1/3) Y_q', n=70 p=1225
inline constexpr double kTauBulkKs = 0.06;        // bulk of tau vs (1/3) Y_q', n=70 p=600
inline constexpr double kLinearKsSmallQ = 0.03;   // tau vs 1/3 + (2/3) Y_q, q <= 0.25
inline constexpr double kLinearKs = 0.05;         // same, q > 0.25
inline constexpr double kWrongLawKs = 0.2;        // minimum separation from the wrong law
inline constexpr double kKernelKs = 0.06;         // H_phi vs alpha Y_q'
inline constexpr double kTraceIntercept = 0.01;   // |trace(H)/p - 1/3|
inline constexpr double kCovariance = 0.01;       // covariance table entries
inline constexpr double kMeanEigenvalue = 1e-8;   // |mean eig(tau) - 1|
inline constexpr double kDecompositionGap = 1e-10;
inline constexpr double kStieltjesMean = 0.02;    // |E g(z) - g_law(z)|
inline constexpr double kSigmas = 3.0;            // Monte-Carlo agreement, in standard errors
inline constexpr double kBulkMargin = 0.1;        // bulk cutoff (1/3) l+(q') (1 + margin)
inline constexpr double kCollapseBand = 0.01;     // |eigenvalue| band for a vanishing alpha
inline constexpr double kCollapseFraction = 0.95;
}  // namespace tolerance

enum class Comparison { le, lt, ge, gt, info };

/// A named measurement with its acceptance threshold.
struct Metric {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  Comparison comparison = Comparison::info;
  std::optional<double> standard_error;
  std::string note;

  bool pass() const noexcept;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json inputs = nlohmann::json::object();
  std::vector<Metric> metrics;
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::string> artifacts;

  Metric& add(std::string metric_name, double value, Comparison cmp, double threshold,
              std::string note = {});
  Metric& info(std::string metric_name, double value, std::string note = {});
  const Metric* find(std::string_view metric_name) const noexcept;
  bool passed() const noexcept;
};

nlohmann::json to_json(const ExperimentReport& report);

/// Settings shared by every campaign.
struct ExperimentOptions {
  std::uint64_t first_seed = 1;
  std::size_t seeds = 1;
  Marginal marginal = Marginal::uniform01;
  ProjectionMode mode = ProjectionMode::exact_cdf;
  unsigned threads = 1;
  /// Seeds for the larger confirmation run; 0 skips it.
  std::size_t decay_seeds = 1;
  std::size_t bins = 0;
  /// When set, spectra, histograms and law grids are written here as
  /// `<experiment>_<n>_<p>_<seed>.*`.
  std::optional<std::filesystem::path> artifact_dir;
  /// Embedded in every artifact header.
  nlohmann::json config = nullptr;

  std::uint64_t seed(std::size_t s) const noexcept { return first_seed + s; }
};

/// Fixed evaluation points for resolvent checks.
std::vector<std::complex<double>> default_z_grid();

/// H spectra vs (1/3) Y_q'. Confirmation rerun at (2n, 4p), which keeps q' matched.
ExperimentReport run_quadratic_lsd(std::size_t n, std::size_t p, const ExperimentOptions& opts);

/// tau spectra in the quadratic regime over a list of p: bulk fit, outlier
/// count, rank bound, mean-eigenvalue identity and the trend across p.
ExperimentReport run_tau_quadratic(std::size_t n, const std::vector<std::size_t>& p_list,
                                   const ExperimentOptions& opts);

/// tau spectra vs 1/3 + (2/3) Y_q, plus separation from (1/3) Y_q'.
/// Confirmation rerun at (2n, 2p).
ExperimentReport run_linear_lsd(std::size_t n, std::size_t p, const ExperimentOptions& opts);

/// Monte-Carlo check of E[h^T G(z) h] = (-q'' + q'' z E[g^{p-1}(z)]) / 3 for
/// the first row h of H and the resolvent G of H with that row and column removed.
ExperimentReport verify_resolvent_identity(std::size_t n, std::size_t p,
                                           const std::vector<std::complex<double>>& zs,
                                           const ExperimentOptions& opts);

/// Across-seed variance of g^p(z) for H along n_list with p = round(q' n(n-1)/2).
ExperimentReport verify_concentration(const std::vector<std::size_t>& n_list, double q_prime,
                                      std::complex<double> z, const ExperimentOptions& opts);

/// H_phi spectra vs alpha Y_q'. alpha comes from alpha_coefficient unless given.
ExperimentReport run_kernel_generalization(const Kernel& kernel, std::size_t n, std::size_t p,
                                           const ExperimentOptions& opts,
                                           std::optional<double> alpha = std::nullopt);

/// KS(F^tau, F^H) <= rank(tau - H)/p and rank(tau - H) <= 5n on every seed.
ExperimentReport verify_rank_bound(std::size_t n, std::size_t p, const ExperimentOptions& opts);

/// E[vbar_(i1 j1) vbar_(i2 j2)] within one row: equal pairs, pairs sharing one
/// index, disjoint pairs.
ExperimentReport verify_covariance_table(std::size_t n, std::size_t p, const ExperimentOptions& opts);

/// For p > M the Kendall matrix has at least p - M eigenvalues below tol_eig.
ExperimentReport verify_zero_onset(std::size_t n, std::size_t p, const ExperimentOptions& opts);

/// Parameters for run_named_experiment; unset sizes fall back to per-experiment defaults.
struct ExperimentRequest {
  std::optional<std::size_t> n;
  std::vector<std::size_t> n_list;
  std::vector<std::size_t> p_list;
  std::vector<std::complex<double>> zs;
  std::string kernel = "sign";
  double q_prime = 0.5;
  ExperimentOptions options;
};

const std::vector<std::string>& experiment_names();
bool is_known_experiment(const std::string& name);
/// Throws ValidationError for an unknown name.
ExperimentReport run_named_experiment(const std::string& name, const ExperimentRequest& request);

/// Figure data: H histogram at (n, p) with the (1/3) Y_q' density grid.
nlohmann::json make_figure_h_histogram(std::size_t n, std::size_t p, std::uint64_t seed,
                                       std::size_t bins, const std::filesystem::path& dir,
                                       const nlohmann::json& config);
/// Figure data: tau histograms at fixed n over p_list, law grids and the
/// annotation values (mean 1/3, bulk edges, linear-law edges).
nlohmann::json make_figure_tau_histograms(std::size_t n, const std::vector<std::size_t>& p_list,
                                          std::uint64_t seed, std::size_t bins,
                                          const std::filesystem::path& dir,
                                          const nlohmann::json& config);

}  // namespace kendall_lab
