#include "kendall_lab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kendall_lab/errors.hpp"
#include "kendall_lab/io.hpp"
#include "kendall_lab/kendall.hpp"
#include "kendall_lab/parallel.hpp"
#include "kendall_lab/spectral.hpp"

namespace kendall_lab {

namespace {

using cplx = std::complex<double>;

std::string_view comparison_tag(Comparison c) {
  switch (c) {
    case Comparison::le: return "<=";
    case Comparison::lt: return "<";
    case Comparison::ge: return ">=";
    case Comparison::gt: return ">";
    case Comparison::info: return "info";
  }
  return "info";
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Standard error of the mean; zero for fewer than two values.
double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// Worker split: seeds in parallel first, leftover threads inside each seed.
struct ThreadSplit {
  unsigned outer;
  unsigned inner;
};

ThreadSplit split_threads(unsigned threads, std::size_t tasks) {
  const unsigned t = std::max(1U, threads);
  const auto outer = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(t, tasks)));
  return {outer, std::max(1U, t / outer)};
}

void require_sizes(std::size_t n, std::size_t p) {
  if (n < 2) throw ValidationError("need n >= 2");
  if (p < 1) throw ValidationError("need p >= 1");
}

std::string stem(std::string_view experiment, std::size_t n, std::size_t p, std::uint64_t seed) {
  return std::string(experiment) + "_" + std::to_string(n) + "_" + std::to_string(p) + "_" +
         std::to_string(seed);
}

void write_spectrum_artifacts(ExperimentReport& report, const ExperimentOptions& opts,
                              std::string_view experiment, std::uint64_t seed, const Spectrum& s,
                              const MPLaw& law) {
  if (!opts.artifact_dir) return;
  const auto& dir = *opts.artifact_dir;
  const auto base = stem(experiment, s.meta().n, s.meta().p, seed);
  const auto spectrum_path = dir / (base + ".spectrum.csv");
  const auto hist_path = dir / (base + ".hist.json");
  const auto law_path = dir / (base + ".law.csv");
  io::atomic_write(spectrum_path, io::spectrum_csv(s, opts.config));
  auto hist = io::histogram_json(esd(s).histogram(opts.bins), s.meta());
  hist["config"] = opts.config;
  io::atomic_write(hist_path, hist.dump(2) + "\n");
  io::atomic_write(law_path, io::law_grid_csv(law));
  report.artifacts.push_back(spectrum_path.string());
  report.artifacts.push_back(hist_path.string());
  report.artifacts.push_back(law_path.string());
}

nlohmann::json complex_json(cplx z) { return {z.real(), z.imag()}; }

struct HSample {
  Spectrum spectrum;
  double trace_over_p;
};

HSample h_spectrum(std::size_t n, std::size_t p, std::uint64_t seed, const ExperimentOptions& opts,
                   unsigned inner, const Kernel& kernel = Kernel::sign()) {
  const auto x = generate(p, n, opts.marginal, seed, inner);
  const auto h = h_matrix(hoeffding_parts(x, opts.mode, kernel));
  return {eigenvalues(h, {n, p, MatrixSource::h}), h.trace() / static_cast<double>(p)};
}

double quadratic_ks(const Spectrum& s, const MPLaw& law) { return ks_distance(esd(s), law); }

// Mean KS of H spectra over `count` seeds starting at `first`.
std::vector<double> h_ks_over_seeds(std::size_t n, std::size_t p, std::uint64_t first, std::size_t count,
                                    const ExperimentOptions& opts) {
  const auto law = law_for_regime(n, p, Regime::quadratic);
  const auto split = split_threads(opts.threads, count);
  std::vector<double> ks(count);
  parallel_for(count, split.outer, [&](std::size_t s) {
    ks[s] = quadratic_ks(h_spectrum(n, p, first + s, opts, split.inner).spectrum, law);
  });
  return ks;
}

nlohmann::json base_inputs(std::size_t n, std::size_t p, const ExperimentOptions& opts) {
  return {{"n", n},
          {"p", p},
          {"first_seed", opts.first_seed},
          {"seeds", opts.seeds},
          {"marginal", std::string(to_string(opts.marginal))},
          {"mode", std::string(to_string(opts.mode))},
          {"q", linear_ratio(n, p)},
          {"q_prime", quadratic_ratio(n, p)}};
}

ExperimentReport make_report(std::string name, nlohmann::json inputs = nlohmann::json::object()) {
  ExperimentReport r;
  r.name = std::move(name);
  r.inputs = std::move(inputs);
  return r;
}

double linear_tolerance(double q) {
  return q <= 0.25 ? tolerance::kLinearKsSmallQ : tolerance::kLinearKs;
}

}  // namespace

bool Metric::pass() const noexcept {
  switch (comparison) {
    case Comparison::le: return value <= threshold;
    case Comparison::lt: return value < threshold;
    case Comparison::ge: return value >= threshold;
    case Comparison::gt: return value > threshold;
    case Comparison::info: return true;
  }
  return false;
}

Metric& ExperimentReport::add(std::string metric_name, double value, Comparison cmp, double threshold,
                              std::string note) {
  metrics.push_back({std::move(metric_name), value, threshold, cmp, std::nullopt, std::move(note)});
  return metrics.back();
}

Metric& ExperimentReport::info(std::string metric_name, double value, std::string note) {
  return add(std::move(metric_name), value, Comparison::info, 0.0, std::move(note));
}

const Metric* ExperimentReport::find(std::string_view metric_name) const noexcept {
  for (const auto& m : metrics) {
    if (m.name == metric_name) return &m;
  }
  return nullptr;
}

bool ExperimentReport::passed() const noexcept {
  return std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.pass(); });
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : report.metrics) {
    nlohmann::json j = {{"name", m.name},
                        {"value", m.value},
                        {"comparison", std::string(comparison_tag(m.comparison))},
                        {"pass", m.pass()}};
    if (m.comparison != Comparison::info) j["threshold"] = m.threshold;
    if (m.standard_error) j["standard_error"] = *m.standard_error;
    if (!m.note.empty()) j["note"] = m.note;
    metrics.push_back(std::move(j));
  }
  return {{"name", report.name},   {"inputs", report.inputs},       {"metrics", metrics},
          {"details", report.details}, {"artifacts", report.artifacts}, {"pass", report.passed()}};
}

std::vector<cplx> default_z_grid() { return {{1.0, 0.5}, {0.5, 1.0}, {2.0, 0.25}}; }

ExperimentReport run_quadratic_lsd(std::size_t n, std::size_t p, const ExperimentOptions& opts) {
  require_sizes(n, p);
  const double qp = quadratic_ratio(n, p);
  if (qp < 0.05 || qp > 5.0) {
    throw ValidationError("quadratic-lsd: q' = " + io::format_double(qp) + " outside [0.05, 5]");
  }
  auto report = make_report("quadratic-lsd", base_inputs(n, p, opts));
  const auto law = law_for_regime(n, p, Regime::quadratic);
  const auto split = split_threads(opts.threads, opts.seeds);
  std::vector<HSample> samples;
  samples.reserve(opts.seeds);
  for (std::size_t s = 0; s < opts.seeds; ++s) samples.push_back({Spectrum({0.0}), 0.0});
  parallel_for(opts.seeds, split.outer, [&](std::size_t s) {
    samples[s] = h_spectrum(n, p, opts.seed(s), opts, split.inner);
  });

  std::vector<double> ks, traces;
  for (std::size_t s = 0; s < opts.seeds; ++s) {
    ks.push_back(quadratic_ks(samples[s].spectrum, law));
    traces.push_back(samples[s].trace_over_p);
    write_spectrum_artifacts(report, opts, report.name, opts.seed(s), samples[s].spectrum, law);
  }
  report.details["ks_per_seed"] = ks;
  report.details["trace_over_p_per_seed"] = traces;
  const double mean_ks = mean_of(ks);
  report.add("mean_ks_h_vs_law", mean_ks, Comparison::le, tolerance::kQuadraticLsdKs,
             "KS(F^H, (1/3) Y_q')")
      .standard_error = standard_error(ks);
  report.add("trace_over_p_gap", std::abs(mean_of(traces) - 1.0 / 3.0), Comparison::le,
             tolerance::kTraceIntercept, "|trace(H)/p - 1/3|");

  if (opts.decay_seeds > 0) {
    const std::size_t n2 = 2 * n, p2 = 4 * p;
    const auto larger = h_ks_over_seeds(n2, p2, opts.first_seed, opts.decay_seeds, opts);
    report.details["decay"] = {{"n", n2}, {"p", p2}, {"q_prime", quadratic_ratio(n2, p2)},
                               {"ks_per_seed", larger}};
    report.add("larger_size_mean_ks", mean_of(larger), Comparison::lt, mean_ks,
               "rerun at (2n, 4p) must sit closer to the law");
  }
  return report;
}

ExperimentReport run_tau_quadratic(std::size_t n, const std::vector<std::size_t>& p_list,
                                   const ExperimentOptions& opts) {
  if (p_list.empty()) throw ValidationError("tau-quadratic: empty p list");
  for (auto p : p_list) require_sizes(n, p);
  auto report = make_report("tau-quadratic");
  report.inputs = {{"n", n},
                   {"p_list", p_list},
                   {"first_seed", opts.first_seed},
                   {"seeds", opts.seeds},
                   {"marginal", std::string(to_string(opts.marginal))},
                   {"mode", std::string(to_string(opts.mode))},
                   {"bulk_margin", tolerance::kBulkMargin}};

  struct PerSeed {
    double bulk_ks = 0, linear_ks = 0, tau_h_ks = 0, mean_eig = 0, top = 0;
    std::size_t outliers = 0, rank = 0;
    std::optional<Spectrum> spectrum;
  };
  const double five_n = 5.0 * static_cast<double>(n);
  std::vector<double> bulk_by_p, linear_by_p;
  std::size_t worst_outliers = 0, fewest_outliers = SIZE_MAX, worst_rank = 0;
  double worst_mean_gap = 0.0, worst_bound_slack = -1.0, worst_top_ratio = 1.0;

  for (auto p : p_list) {
    const auto quad = law_for_regime(n, p, Regime::quadratic);
    const auto lin = law_for_regime(n, p, Regime::linear);
    const double cutoff = quad.upper_edge() * (1.0 + tolerance::kBulkMargin);
    const auto split = split_threads(opts.threads, opts.seeds);
    std::vector<PerSeed> rows(opts.seeds);
    parallel_for(opts.seeds, split.outer, [&](std::size_t s) {
      const auto x = generate(p, n, opts.marginal, opts.seed(s), split.inner);
      const auto tau = tau_fast(x, split.inner);
      const auto h = h_matrix(hoeffding_parts(x, opts.mode));
      auto spec = eigenvalues(tau, {n, p, MatrixSource::tau});
      const auto h_spec = eigenvalues(h, {n, p, MatrixSource::h});
      auto& row = rows[s];
      const auto values = spec.eigenvalues();
      std::vector<double> bulk;
      for (double v : values) {
        if (v <= cutoff) bulk.push_back(v);
      }
      row.outliers = values.size() - bulk.size();
      row.bulk_ks = bulk.empty() ? 1.0 : ks_distance(EmpiricalDistribution(std::move(bulk)), quad);
      row.linear_ks = ks_distance(esd(spec), lin);
      row.tau_h_ks = ks_distance(esd(spec), esd(h_spec));
      row.rank = numerical_rank(tau - h);
      row.mean_eig = spec.mean();
      row.top = spec.max();
      row.spectrum = std::move(spec);
    });

    std::vector<double> bulk_ks, linear_ks;
    nlohmann::json per_seed = nlohmann::json::array();
    // Outlier scale predicted by the linear law's upper edge.
    const double linear_top = (2.0 / 3.0) * std::pow(1.0 + std::sqrt(linear_ratio(n, p)), 2);
    for (std::size_t s = 0; s < opts.seeds; ++s) {
      const auto& r = rows[s];
      bulk_ks.push_back(r.bulk_ks);
      linear_ks.push_back(r.linear_ks);
      worst_outliers = std::max(worst_outliers, r.outliers);
      fewest_outliers = std::min(fewest_outliers, r.outliers);
      worst_rank = std::max(worst_rank, r.rank);
      worst_mean_gap = std::max(worst_mean_gap, std::abs(r.mean_eig - 1.0));
      const double slack = r.tau_h_ks - static_cast<double>(r.rank) / static_cast<double>(p);
      worst_bound_slack = std::max(worst_bound_slack, slack);
      const double ratio = r.top / linear_top;
      const double log_ratio = std::abs(std::log(ratio));
      if (log_ratio > std::abs(std::log(worst_top_ratio))) worst_top_ratio = ratio;
      per_seed.push_back({{"seed", opts.seed(s)},
                          {"bulk_ks", r.bulk_ks},
                          {"linear_law_ks", r.linear_ks},
                          {"ks_tau_h", r.tau_h_ks},
                          {"rank_tau_minus_h", r.rank},
                          {"outliers", r.outliers},
                          {"max_eigenvalue", r.top},
                          {"mean_eigenvalue", r.mean_eig}});
      write_spectrum_artifacts(report, opts, report.name, opts.seed(s), *r.spectrum, quad);
    }
    bulk_by_p.push_back(mean_of(bulk_ks));
    linear_by_p.push_back(mean_of(linear_ks));
    report.details["p_" + std::to_string(p)] = {{"q", linear_ratio(n, p)},
                                                {"q_prime", quadratic_ratio(n, p)},
                                                {"bulk_cutoff", cutoff},
                                                {"per_seed", per_seed}};
    // Only the largest p is held to the tolerance; smaller ones feed the trend check.
    const bool gated = p == *std::max_element(p_list.begin(), p_list.end());
    report.add("bulk_ks_p" + std::to_string(p), bulk_by_p.back(),
               gated ? Comparison::le : Comparison::info, tolerance::kTauBulkKs,
               "bulk of tau vs (1/3) Y_q'");
  }

  report.add("max_outliers", static_cast<double>(worst_outliers), Comparison::le, five_n,
             "eigenvalues above the bulk cutoff");
  report.add("min_outliers", static_cast<double>(fewest_outliers), Comparison::ge, 1.0);
  report.add("max_rank_tau_minus_h", static_cast<double>(worst_rank), Comparison::le, five_n);
  report.add("max_ks_minus_rank_bound", worst_bound_slack, Comparison::le, 0.0,
             "KS(F^tau, F^H) - rank(tau - H)/p");
  report.add("max_mean_eigenvalue_gap", worst_mean_gap, Comparison::le, tolerance::kMeanEigenvalue);
  report.add("worst_top_eigenvalue_ratio", worst_top_ratio, Comparison::info, 0.0,
             "max eigenvalue / ((2/3)(1+sqrt q)^2)");
  report.add("top_eigenvalue_log_ratio", std::abs(std::log(worst_top_ratio)), Comparison::le,
             std::log(2.0), "within a factor 2 of (2/3)(1+sqrt q)^2");
  std::size_t bulk_rises = 0, linear_drops = 0;
  for (std::size_t i = 1; i < bulk_by_p.size(); ++i) {
    if (bulk_by_p[i] > bulk_by_p[i - 1]) ++bulk_rises;
    if (linear_by_p[i] < linear_by_p[i - 1]) ++linear_drops;
  }
  report.details["bulk_ks_by_p"] = bulk_by_p;
  report.details["linear_law_ks_by_p"] = linear_by_p;
  report.add("bulk_ks_increases_along_p", static_cast<double>(bulk_rises), Comparison::le, 0.0,
             "quadratic-law fit improves as p grows");
  report.add("linear_ks_decreases_along_p", static_cast<double>(linear_drops), Comparison::le, 0.0,
             "linear-law fit degrades as p grows");
  return report;
}

ExperimentReport run_linear_lsd(std::size_t n, std::size_t p, const ExperimentOptions& opts) {
  require_sizes(n, p);
  const double q = linear_ratio(n, p);
  if (q < 0.05 || q > 5.0) {
    throw ValidationError("linear-lsd: q = " + io::format_double(q) + " outside [0.05, 5]");
  }
  auto report = make_report("linear-lsd", base_inputs(n, p, opts));

  auto run = [&](std::size_t nn, std::size_t pp, std::uint64_t first, std::size_t count,
                 bool artifacts) {
    const auto law = law_for_regime(nn, pp, Regime::linear);
    const auto wrong = law_for_regime(nn, pp, Regime::quadratic);
    const auto split = split_threads(opts.threads, count);
    std::vector<double> ks(count), wrong_ks(count);
    std::vector<std::optional<Spectrum>> spectra(count);
    parallel_for(count, split.outer, [&](std::size_t s) {
      const auto x = generate(pp, nn, opts.marginal, first + s, split.inner);
      auto spec = eigenvalues(tau_fast(x, split.inner), {nn, pp, MatrixSource::tau});
      ks[s] = ks_distance(esd(spec), law);
      wrong_ks[s] = ks_distance(esd(spec), wrong);
      spectra[s] = std::move(spec);
    });
    if (artifacts) {
      for (std::size_t s = 0; s < count; ++s) {
        write_spectrum_artifacts(report, opts, report.name, first + s, *spectra[s], law);
      }
    }
    return std::pair{ks, wrong_ks};
  };

  const auto [ks, wrong_ks] = run(n, p, opts.first_seed, opts.seeds, true);
  report.details["ks_per_seed"] = ks;
  report.details["wrong_law_ks_per_seed"] = wrong_ks;
  report.add("max_ks_tau_vs_law", *std::max_element(ks.begin(), ks.end()), Comparison::le,
             linear_tolerance(q), "KS(F^tau, 1/3 + (2/3) Y_q)");
  report.add("min_ks_vs_wrong_law", *std::min_element(wrong_ks.begin(), wrong_ks.end()),
             Comparison::ge, tolerance::kWrongLawKs, "KS(F^tau, (1/3) Y_q')");
  if (opts.decay_seeds > 0) {
    const auto [larger, unused] = run(2 * n, 2 * p, opts.first_seed, opts.decay_seeds, false);
    report.details["decay"] = {{"n", 2 * n}, {"p", 2 * p}, {"ks_per_seed", larger}};
    report.add("larger_size_mean_ks", mean_of(larger), Comparison::lt, mean_of(ks),
               "rerun at (2n, 2p) must sit closer to the law");
  }
  return report;
}

ExperimentReport verify_resolvent_identity(std::size_t n, std::size_t p, const std::vector<cplx>& zs,
                                           const ExperimentOptions& opts) {
  require_sizes(n, p);
  if (p < 2) throw ValidationError("resolvent-identity: need p >= 2");
  if (zs.empty()) throw ValidationError("resolvent-identity: no z values");
  for (auto z : zs) {
    if (std::abs(z.imag()) < 0.05) throw ValidationError("resolvent-identity: need |Im z| >= 0.05");
  }
  if (opts.mode != ProjectionMode::exact_cdf) {
    throw ValidationError("resolvent-identity: the identity holds for exact projections only");
  }
  auto report = make_report("resolvent-identity", base_inputs(n, p, opts));
  nlohmann::json zj = nlohmann::json::array();
  for (auto z : zs) zj.push_back(complex_json(z));
  report.inputs["z"] = zj;

  const double m = static_cast<double>(pair_count(n));
  const double q2 = static_cast<double>(p - 1) / m;  // 2(p-1)/(n(n-1))
  report.inputs["q_double_prime"] = q2;
  const std::size_t nz = zs.size();
  // Per seed and z: quadratic form, closed-form right side, trace route.
  std::vector<cplx> quad(opts.seeds * nz), rhs(opts.seeds * nz), trace_route(opts.seeds * nz);
  cplx conj_gap = 0.0;

  const auto split = split_threads(opts.threads, opts.seeds);
  parallel_for(opts.seeds, split.outer, [&](std::size_t s) {
    const auto x = generate(p, n, opts.marginal, opts.seed(s), split.inner);
    const auto h = h_matrix(hoeffding_parts(x, opts.mode));
    SymmetricMatrix minor(p - 1);
    Eigen::VectorXcd first(static_cast<Eigen::Index>(p - 1));
    for (std::size_t a = 1; a < p; ++a) {
      first(static_cast<Eigen::Index>(a - 1)) = h(0, a);
      for (std::size_t b = 1; b <= a; ++b) minor(a - 1, b - 1) = h(a, b);
    }
    const Eigen::MatrixXcd minor_dense = minor.to_dense().cast<cplx>();
    for (std::size_t k = 0; k < nz; ++k) {
      const auto g = resolvent(minor, zs[k]);
      const std::size_t slot = s * nz + k;
      quad[slot] = first.transpose() * g * first;
      const cplx stieltjes = g.trace() / static_cast<double>(p - 1);
      rhs[slot] = (-q2 + q2 * zs[k] * stieltjes) / 3.0;
      trace_route[slot] = (minor_dense * g).trace() / (3.0 * m);
    }
  });

  // Real symmetric input: C(conj z) = conj C(z).
  {
    const auto x = generate(p, n, opts.marginal, opts.first_seed, opts.threads);
    const auto h = h_matrix(hoeffding_parts(x, opts.mode));
    SymmetricMatrix minor(p - 1);
    Eigen::VectorXcd first(static_cast<Eigen::Index>(p - 1));
    for (std::size_t a = 1; a < p; ++a) {
      first(static_cast<Eigen::Index>(a - 1)) = h(0, a);
      for (std::size_t b = 1; b <= a; ++b) minor(a - 1, b - 1) = h(a, b);
    }
    const cplx c = first.transpose() * resolvent(minor, zs[0]) * first;
    const cplx c_conj = first.transpose() * resolvent(minor, std::conj(zs[0])) * first;
    conj_gap = c_conj - std::conj(c);
  }

  auto paired = [&](const std::vector<cplx>& a, const std::vector<cplx>& b, std::size_t k) {
    std::vector<double> re, im;
    for (std::size_t s = 0; s < opts.seeds; ++s) {
      const cplx d = a[s * nz + k] - b[s * nz + k];
      re.push_back(d.real());
      im.push_back(d.imag());
    }
    const cplx mean{mean_of(re), mean_of(im)};
    return std::pair{mean, std::hypot(standard_error(re), standard_error(im))};
  };

  nlohmann::json per_z = nlohmann::json::array();
  for (std::size_t k = 0; k < nz; ++k) {
    std::vector<double> cre, cim, rre, rim;
    for (std::size_t s = 0; s < opts.seeds; ++s) {
      cre.push_back(quad[s * nz + k].real());
      cim.push_back(quad[s * nz + k].imag());
      rre.push_back(rhs[s * nz + k].real());
      rim.push_back(rhs[s * nz + k].imag());
    }
    const auto [gap, se] = paired(quad, rhs, k);
    const auto [trace_gap, trace_se] = paired(quad, trace_route, k);
    const std::string label = "z=" + io::format_double(zs[k].real()) + "+" + io::format_double(zs[k].imag()) + "i";
    per_z.push_back({{"z", complex_json(zs[k])},
                     {"c_estimate", {mean_of(cre), mean_of(cim)}},
                     {"rhs_estimate", {mean_of(rre), mean_of(rim)}},
                     {"gap", complex_json(gap)},
                     {"standard_error", se}});
    report.add("identity_gap_" + label, std::abs(gap), Comparison::le, tolerance::kSigmas * se,
               "|C_est - (-q'' + q'' z E g) / 3| within 3 SE")
        .standard_error = se;
    report.add("trace_route_gap_" + label, std::abs(trace_gap), Comparison::le,
               tolerance::kSigmas * trace_se, "C_est vs (1/3)(2/(n(n-1))) E tr(H~ G)")
        .standard_error = trace_se;
  }
  report.details["per_z"] = per_z;
  report.add("conjugate_symmetry_gap", std::abs(conj_gap), Comparison::le, 1e-12,
             "C(conj z) = conj C(z)");
  return report;
}

ExperimentReport verify_concentration(const std::vector<std::size_t>& n_list, double q_prime, cplx z,
                                      const ExperimentOptions& opts) {
  if (n_list.size() < 2) throw ValidationError("concentration: need at least two n values");
  if (!(q_prime > 0.0)) throw ValidationError("concentration: need q' > 0");
  if (opts.seeds < 2) throw ValidationError("concentration: need at least two seeds");
  auto report = make_report("concentration");
  report.inputs = {{"n_list", n_list},
                   {"q_prime", q_prime},
                   {"z", complex_json(z)},
                   {"first_seed", opts.first_seed},
                   {"seeds", opts.seeds},
                   {"marginal", std::string(to_string(opts.marginal))},
                   {"mode", std::string(to_string(opts.mode))}};

  std::vector<double> variances, log_p;
  cplx last_mean = 0.0;
  std::size_t last_n = 0, last_p = 0;
  nlohmann::json per_n = nlohmann::json::array();
  for (auto n : n_list) {
    const auto p = static_cast<std::size_t>(
        std::llround(q_prime * static_cast<double>(n) * static_cast<double>(n - 1) / 2.0));
    require_sizes(n, p);
    const auto split = split_threads(opts.threads, opts.seeds);
    std::vector<cplx> g(opts.seeds);
    parallel_for(opts.seeds, split.outer, [&](std::size_t s) {
      g[s] = stieltjes_empirical(h_spectrum(n, p, opts.seed(s), opts, split.inner).spectrum, z);
    });
    cplx mean = 0.0;
    for (auto v : g) mean += v;
    mean /= static_cast<double>(g.size());
    double var = 0.0;
    for (auto v : g) var += std::norm(v - mean);
    var /= static_cast<double>(g.size() - 1);
    variances.push_back(var);
    log_p.push_back(std::log(static_cast<double>(p)));
    per_n.push_back({{"n", n}, {"p", p}, {"mean_g", complex_json(mean)}, {"variance", var}});
    last_mean = mean;
    last_n = n;
    last_p = p;
  }
  report.details["per_n"] = per_n;

  std::size_t rises = 0;
  for (std::size_t i = 1; i < variances.size(); ++i) {
    if (!(variances[i] < variances[i - 1])) ++rises;
  }
  report.add("variance_non_decreases", static_cast<double>(rises), Comparison::le, 0.0,
             "variance strictly decreasing along n");
  report.add("variance_ratio_last_first", variances.back() / variances.front(), Comparison::le, 0.5);

  // Least-squares slope of log variance against log p.
  const double mx = mean_of(log_p);
  std::vector<double> log_var;
  for (double v : variances) log_var.push_back(std::log(v));
  const double my = mean_of(log_var);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < log_p.size(); ++i) {
    sxy += (log_p[i] - mx) * (log_var[i] - my);
    sxx += (log_p[i] - mx) * (log_p[i] - mx);
  }
  report.add("variance_decay_exponent_in_p", sxy / sxx, Comparison::le, -0.5);

  const auto law = law_for_regime(last_n, last_p, Regime::quadratic);
  report.add("mean_g_vs_law_gap", std::abs(last_mean - law.stieltjes(z)), Comparison::le,
             tolerance::kStieltjesMean, "largest n: |mean g - g_law|");
  return report;
}

ExperimentReport run_kernel_generalization(const Kernel& kernel, std::size_t n, std::size_t p,
                                           const ExperimentOptions& opts, std::optional<double> alpha) {
  require_sizes(n, p);
  check_kernel(kernel, opts.marginal, opts.first_seed);
  auto report = make_report("kernel", base_inputs(n, p, opts));
  report.inputs["kernel"] = kernel.name();
  if (!alpha) {
    const auto est = alpha_coefficient(kernel, opts.marginal, opts.first_seed);
    alpha = est.value;
    report.details["alpha_standard_error"] = est.standard_error;
    report.details["alpha_closed_form_inner"] = est.closed_form_inner;
  } else {
    report.details["alpha_supplied"] = true;
  }
  report.info("alpha", *alpha);

  const ProjectionMode mode = kernel.conditional_mean(0.0, opts.marginal).has_value()
                                  ? opts.mode
                                  : ProjectionMode::empirical_rank;
  report.inputs["mode"] = std::string(to_string(mode));

  ExperimentOptions inner_opts = opts;
  inner_opts.mode = mode;
  const auto split = split_threads(opts.threads, opts.seeds);
  std::vector<std::optional<Spectrum>> spectra(opts.seeds);
  std::vector<double> tau_trace(opts.seeds);
  parallel_for(opts.seeds, split.outer, [&](std::size_t s) {
    const auto x = generate(p, n, opts.marginal, opts.seed(s), split.inner);
    const auto h = h_matrix(hoeffding_parts(x, mode, kernel));
    tau_trace[s] = tau_kernel(x, kernel).trace() / static_cast<double>(p);
    spectra[s] = eigenvalues(h, {n, p, MatrixSource::h});
  });
  report.details["tau_phi_trace_over_p"] = tau_trace;

  const bool collapsed = *alpha < 1e-6;
  if (collapsed) {
    double worst = 1.0;
    for (const auto& s : spectra) {
      const auto values = s->eigenvalues();
      const auto inside = std::count_if(values.begin(), values.end(), [](double v) {
        return std::abs(v) <= tolerance::kCollapseBand;
      });
      worst = std::min(worst, static_cast<double>(inside) / static_cast<double>(values.size()));
    }
    report.add("min_fraction_in_collapse_band", worst, Comparison::ge, tolerance::kCollapseFraction,
               "share of eigenvalues in [-0.01, 0.01]");
  } else {
    const MPLaw law(quadratic_ratio(n, p), *alpha, 0.0);
    std::vector<double> ks;
    for (std::size_t s = 0; s < opts.seeds; ++s) {
      ks.push_back(ks_distance(esd(*spectra[s]), law));
      write_spectrum_artifacts(report, opts, report.name, opts.seed(s), *spectra[s], law);
    }
    report.details["ks_per_seed"] = ks;
    const double tol = kernel.name() == "sign" ? tolerance::kQuadraticLsdKs : tolerance::kKernelKs;
    report.add("mean_ks_h_phi_vs_alpha_law", mean_of(ks), Comparison::le, tol,
               "KS(F^H_phi, alpha Y_q')")
        .standard_error = standard_error(ks);
  }
  return report;
}

ExperimentReport verify_rank_bound(std::size_t n, std::size_t p, const ExperimentOptions& opts) {
  require_sizes(n, p);
  auto report = make_report("rank-bound", base_inputs(n, p, opts));
  struct Row {
    double ks = 0, gap = 0;
    std::size_t rank = 0;
  };
  std::vector<Row> rows(opts.seeds);
  const auto split = split_threads(opts.threads, opts.seeds);
  parallel_for(opts.seeds, split.outer, [&](std::size_t s) {
    const auto x = generate(p, n, opts.marginal, opts.seed(s), split.inner);
    const auto tau = tau_fast(x, split.inner);
    const auto parts = hoeffding_parts(x, opts.mode);
    const auto h = h_matrix(parts);
    const auto diff = tau - h;
    rows[s].gap = max_abs_diff(diff, a_matrix(x, parts));
    rows[s].rank = numerical_rank(diff);
    rows[s].ks = ks_distance(esd(eigenvalues(tau)), esd(eigenvalues(h)));
  });
  double worst_slack = -1.0, worst_gap = 0.0;
  std::size_t worst_rank = 0;
  nlohmann::json per_seed = nlohmann::json::array();
  for (std::size_t s = 0; s < opts.seeds; ++s) {
    const auto& r = rows[s];
    worst_slack = std::max(worst_slack, r.ks - static_cast<double>(r.rank) / static_cast<double>(p));
    worst_rank = std::max(worst_rank, r.rank);
    worst_gap = std::max(worst_gap, r.gap);
    per_seed.push_back({{"seed", opts.seed(s)}, {"ks_tau_h", r.ks}, {"rank", r.rank}, {"rank_over_p",
                        static_cast<double>(r.rank) / static_cast<double>(p)}});
  }
  report.details["per_seed"] = per_seed;
  report.add("max_ks_minus_rank_over_p", worst_slack, Comparison::le, 0.0,
             "KS(F^tau, F^H) <= rank(tau - H)/p");
  report.add("max_rank_tau_minus_h", static_cast<double>(worst_rank), Comparison::le,
             5.0 * static_cast<double>(n), "rank(tau - H) <= 5n");
  report.add("max_decomposition_gap", worst_gap, Comparison::le, tolerance::kDecompositionGap,
             "|(tau - H) - A| entrywise");
  return report;
}

ExperimentReport verify_covariance_table(std::size_t n, std::size_t p, const ExperimentOptions& opts) {
  require_sizes(n, p);
  if (n < 4) throw ValidationError("covariance-table: need n >= 4 for disjoint pairs");
  if (opts.seeds < 2) throw ValidationError("covariance-table: need at least two seeds");
  auto report = make_report("covariance-table", base_inputs(n, p, opts));

  // Per seed: mean product in each category.
  std::vector<double> equal(opts.seeds), shared(opts.seeds), disjoint(opts.seeds);
  std::size_t equal_count = 0, shared_count = 0, disjoint_count = 0;
  const auto split = split_threads(opts.threads, opts.seeds);
  std::vector<std::array<std::size_t, 3>> counts(opts.seeds);
  parallel_for(opts.seeds, split.outer, [&](std::size_t s) {
    const auto x = generate(p, n, opts.marginal, opts.seed(s), split.inner);
    const auto parts = hoeffding_parts(x, opts.mode);
    auto at = [&](std::size_t k, std::size_t i, std::size_t j) {
      return parts.vbar(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(pair_position({i, j}, n)));
    };
    double se = 0, ss = 0, sd = 0;
    std::size_t ce = 0, cs = 0, cd = 0;
    for (std::size_t k = 0; k < p; ++k) {
      for (Eigen::Index c = 0; c < parts.vbar.cols(); ++c) {
        const double v = parts.vbar(static_cast<Eigen::Index>(k), c);
        se += v * v;
        ++ce;
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          for (std::size_t l = j + 1; l < n; ++l) {
            const double ij = at(k, i, j), il = at(k, i, l), jl = at(k, j, l);
            ss += ij * il + ij * jl + il * jl;
            cs += 3;
            for (std::size_t m = l + 1; m < n; ++m) {
              sd += ij * at(k, l, m) + il * at(k, j, m) + at(k, i, m) * jl;
              cd += 3;
            }
          }
        }
      }
    }
    equal[s] = se / static_cast<double>(ce);
    shared[s] = ss / static_cast<double>(cs);
    disjoint[s] = sd / static_cast<double>(cd);
    counts[s] = {ce, cs, cd};
  });
  for (const auto& c : counts) {
    equal_count += c[0];
    shared_count += c[1];
    disjoint_count += c[2];
  }
  report.details["samples"] = {{"equal", equal_count}, {"shared_index", shared_count},
                               {"disjoint", disjoint_count}};
  report.details["equal_mean"] = mean_of(equal);
  report.details["shared_mean"] = mean_of(shared);
  report.details["disjoint_mean"] = mean_of(disjoint);
  report.add("equal_pairs_gap", std::abs(mean_of(equal) - 1.0 / 3.0), Comparison::le,
             tolerance::kCovariance, "|E[vbar^2] - 1/3|")
      .standard_error = standard_error(equal);
  report.add("shared_index_pairs_gap", std::abs(mean_of(shared)), Comparison::le, tolerance::kCovariance,
             "|E[vbar_(ij) vbar_(il)]|")
      .standard_error = standard_error(shared);
  report.add("disjoint_pairs_gap", std::abs(mean_of(disjoint)), Comparison::le, tolerance::kCovariance,
             "|E[vbar_(ij) vbar_(lm)]|")
      .standard_error = standard_error(disjoint);
  const double fewest = static_cast<double>(std::min({equal_count, shared_count, disjoint_count}));
  report.add("min_effective_samples", fewest, Comparison::ge, 1e5);
  return report;
}

ExperimentReport verify_zero_onset(std::size_t n, std::size_t p, const ExperimentOptions& opts) {
  require_sizes(n, p);
  auto report = make_report("zero-onset", base_inputs(n, p, opts));
  const std::size_t m = pair_count(n);
  const double expected = p > m ? static_cast<double>(p - m) : 0.0;
  report.inputs["pairs"] = m;
  std::vector<double> zeros(opts.seeds), mean_gap(opts.seeds);
  const auto split = split_threads(opts.threads, opts.seeds);
  parallel_for(opts.seeds, split.outer, [&](std::size_t s) {
    const auto x = generate(p, n, opts.marginal, opts.seed(s), split.inner);
    const auto tau = tau_fast(x, split.inner);
    const double tol = tol_eig(tau);
    const auto spec = eigenvalues(tau, {n, p, MatrixSource::tau});
    const auto values = spec.eigenvalues();
    zeros[s] = static_cast<double>(std::count_if(values.begin(), values.end(),
                                                 [&](double v) { return v <= tol; }));
    mean_gap[s] = std::abs(spec.mean() - 1.0);
  });
  report.details["near_zero_per_seed"] = zeros;
  report.add("min_near_zero_eigenvalues", *std::min_element(zeros.begin(), zeros.end()),
             Comparison::ge, expected, "at least p - M eigenvalues <= tol_eig");
  report.add("max_mean_eigenvalue_gap", *std::max_element(mean_gap.begin(), mean_gap.end()),
             Comparison::le, tolerance::kMeanEigenvalue);
  return report;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "quadratic-lsd", "tau-quadratic",    "linear-lsd", "resolvent-identity", "concentration",
      "kernel",        "rank-bound",       "covariance-table", "zero-onset"};
  return names;
}

bool is_known_experiment(const std::string& name) {
  const auto& names = experiment_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ExperimentReport run_named_experiment(const std::string& name, const ExperimentRequest& req) {
  const auto& o = req.options;
  auto n_or = [&](std::size_t fallback) { return req.n.value_or(fallback); };
  auto p_or = [&](std::size_t fallback) { return req.p_list.empty() ? fallback : req.p_list.front(); };
  if (name == "quadratic-lsd") return run_quadratic_lsd(n_or(70), p_or(1225), o);
  if (name == "tau-quadratic") {
    return run_tau_quadratic(n_or(70), req.p_list.empty() ? std::vector<std::size_t>{300, 400, 500, 600}
                                                          : req.p_list, o);
  }
  if (name == "linear-lsd") return run_linear_lsd(n_or(2000), p_or(200), o);
  if (name == "resolvent-identity") {
    return verify_resolvent_identity(n_or(30), p_or(80), req.zs.empty() ? default_z_grid() : req.zs, o);
  }
  if (name == "concentration") {
    return verify_concentration(req.n_list.empty() ? std::vector<std::size_t>{30, 50, 70} : req.n_list,
                                req.q_prime, req.zs.empty() ? cplx{1.0, 0.5} : req.zs.front(), o);
  }
  if (name == "kernel") return run_kernel_generalization(Kernel::parse(req.kernel), n_or(70), p_or(1225), o);
  if (name == "rank-bound") return verify_rank_bound(n_or(20), p_or(100), o);
  if (name == "covariance-table") return verify_covariance_table(n_or(20), p_or(50), o);
  if (name == "zero-onset") return verify_zero_onset(n_or(10), p_or(60), o);
  throw ValidationError("unknown experiment '" + name + "'");
}

namespace {

constexpr std::string_view kPlotStub = R"(# Plots the histogram and law-density files written next to this script.
# Usage: python3 <this file>   (needs matplotlib)
import csv, glob, json, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for hist_path in sorted(glob.glob(os.path.join(here, "*.hist.json"))):
    base = hist_path[: -len(".hist.json")]
    with open(hist_path) as f:
        hist = json.load(f)
    edges, counts = hist["edges"], hist["counts"]
    total = sum(counts)
    widths = [b - a for a, b in zip(edges, edges[1:])]
    heights = [c / (total * w) if w > 0 else 0 for c, w in zip(counts, widths)]
    fig, ax = plt.subplots()
    ax.bar(edges[:-1], heights, width=widths, align="edge", alpha=0.6)
    law_path = base + ".law.csv"
    if os.path.exists(law_path):
        with open(law_path) as f:
            rows = list(csv.DictReader(f))
        ax.plot([float(r["lambda"]) for r in rows], [float(r["density"]) for r in rows], "r-")
    notes_path = base + ".annotations.json"
    if os.path.exists(notes_path):
        with open(notes_path) as f:
            notes = json.load(f)
        ax.axvline(notes["mean_line"], color="k", linestyle="--")
        for x in notes["linear_edges"]:
            ax.axvline(x, color="r", linestyle="--")
    ax.set_title(os.path.basename(base))
    fig.savefig(base + ".png", dpi=120)
)";

}  // namespace

nlohmann::json make_figure_h_histogram(std::size_t n, std::size_t p, std::uint64_t seed, std::size_t bins,
                                       const std::filesystem::path& dir, const nlohmann::json& config) {
  require_sizes(n, p);
  const auto x = generate(p, n, Marginal::uniform01, seed);
  const auto h = h_matrix(hoeffding_parts(x, ProjectionMode::exact_cdf));
  const auto spec = eigenvalues(h, {n, p, MatrixSource::h});
  const auto law = law_for_regime(n, p, Regime::quadratic);
  const auto base = dir / stem("fig1", n, p, seed);
  auto hist = io::histogram_json(esd(spec).histogram(bins), spec.meta());
  hist["config"] = config;
  io::atomic_write(base.string() + ".spectrum.csv", io::spectrum_csv(spec, config));
  io::atomic_write(base.string() + ".hist.json", hist.dump(2) + "\n");
  io::atomic_write(base.string() + ".law.csv", io::law_grid_csv(law));
  io::atomic_write(dir / "fig1_plot.py", kPlotStub);
  return {{"figure", "fig1"},
          {"n", n},
          {"p", p},
          {"seed", seed},
          {"q", linear_ratio(n, p)},
          {"q_prime", quadratic_ratio(n, p)},
          {"ks", ks_distance(esd(spec), law)},
          {"trace_over_p", h.trace() / static_cast<double>(p)},
          {"min_eigenvalue", spec.min()},
          {"max_eigenvalue", spec.max()},
          {"law_support", {law.lower_edge(), law.upper_edge()}},
          {"config", config}};
}

nlohmann::json make_figure_tau_histograms(std::size_t n, const std::vector<std::size_t>& p_list,
                                          std::uint64_t seed, std::size_t bins,
                                          const std::filesystem::path& dir, const nlohmann::json& config) {
  if (p_list.empty()) throw ValidationError("fig2: empty p list");
  nlohmann::json panels = nlohmann::json::array();
  for (auto p : p_list) {
    require_sizes(n, p);
    const auto x = generate(p, n, Marginal::uniform01, seed);
    const auto spec = eigenvalues(tau_fast(x), {n, p, MatrixSource::tau});
    const auto quad = law_for_regime(n, p, Regime::quadratic);
    const auto lin = law_for_regime(n, p, Regime::linear);
    const auto base = dir / stem("fig2", n, p, seed);
    auto hist = io::histogram_json(esd(spec).histogram(bins), spec.meta());
    hist["config"] = config;
    const nlohmann::json notes = {{"mean_line", 1.0 / 3.0},
                                  {"bulk_edges", {quad.lower_edge(), quad.upper_edge()}},
                                  {"linear_edges", {lin.lower_edge(), lin.upper_edge()}},
                                  {"q", linear_ratio(n, p)},
                                  {"q_prime", quadratic_ratio(n, p)},
                                  {"config", config}};
    io::atomic_write(base.string() + ".spectrum.csv", io::spectrum_csv(spec, config));
    io::atomic_write(base.string() + ".hist.json", hist.dump(2) + "\n");
    io::atomic_write(base.string() + ".law.csv", io::law_grid_csv(quad));
    io::atomic_write(base.string() + ".annotations.json", notes.dump(2) + "\n");
    panels.push_back({{"p", p},
                      {"mean_eigenvalue", spec.mean()},
                      {"max_eigenvalue", spec.max()},
                      {"annotations", notes}});
  }
  io::atomic_write(dir / "fig2_plot.py", kPlotStub);
  return {{"figure", "fig2"}, {"n", n}, {"seed", seed}, {"panels", panels}, {"config", config}};
}

}  // namespace kendall_lab
