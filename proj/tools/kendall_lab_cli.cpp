#include <cstdlib>
#include <iostream>
#include <regex>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "kendall_lab/datagen.hpp"
#include "kendall_lab/errors.hpp"
#include "kendall_lab/experiments.hpp"
#include "kendall_lab/hoeffding.hpp"
#include "kendall_lab/io.hpp"
#include "kendall_lab/kendall.hpp"
#include "kendall_lab/laws.hpp"
#include "kendall_lab/spectral.hpp"

namespace fs = std::filesystem;
using namespace kendall_lab;
using nlohmann::json;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;

struct RunConfig {
  std::string subcommand;
  std::vector<std::size_t> n;
  std::vector<std::size_t> p;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  std::string marginal = "uniform01";
  std::string mode = "exact_cdf";
  std::string kernel = "sign";
  std::size_t bins = 0;
  std::vector<std::string> z;
  std::string out;
  std::string format = "csv";
  unsigned threads = 1;
  std::string input;
  std::string matrix = "h";
  std::string regime = "quadratic";
  std::string target;  // figure or experiment name
  double q_prime = 0.5;
  std::size_t decay_seeds = 1;
  std::size_t samples = 100000;
};

json to_json(const RunConfig& c) {
  json j = {{"subcommand", c.subcommand}, {"n", c.n},           {"p", c.p},
            {"seed", c.seed},             {"seeds", c.seeds},   {"marginal", c.marginal},
            {"mode", c.mode},             {"kernel", c.kernel}, {"bins", c.bins},
            {"z", c.z},                   {"format", c.format}};
  if (!c.input.empty()) j["input"] = c.input;
  if (!c.target.empty()) j["target"] = c.target;
  if (c.subcommand == "spectrum") j["matrix"] = c.matrix;
  if (c.subcommand == "law") j["regime"] = c.regime;
  if (c.subcommand == "experiment") {
    j["q_prime"] = c.q_prime;
    j["decay_seeds"] = c.decay_seeds;
  }
  if (c.subcommand == "alpha") j["samples"] = c.samples;
  return j;
}

// Accepts "a+bi", "a-bi", "bi" or plain "a".
std::complex<double> parse_complex(const std::string& text) {
  static const std::regex full(R"(^\s*([-+]?[0-9.eE]+)\s*([-+])\s*([0-9.eE]*)i\s*$)");
  static const std::regex imag_only(R"(^\s*([-+]?[0-9.eE]*)i\s*$)");
  static const std::regex real_only(R"(^\s*([-+]?[0-9.eE]+)\s*$)");
  auto number = [&](const std::string& s, double fallback) {
    if (s.empty() || s == "+") return fallback;
    if (s == "-") return -fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("cannot parse complex number '" + text + "'");
    }
  };
  std::smatch m;
  if (std::regex_match(text, m, full)) {
    const double im = number(m[3].str(), 1.0);
    return {number(m[1].str(), 0.0), m[2].str() == "-" ? -im : im};
  }
  if (std::regex_match(text, m, imag_only)) return {0.0, number(m[1].str(), 1.0)};
  if (std::regex_match(text, m, real_only)) return {number(m[1].str(), 0.0), 0.0};
  throw ValidationError("cannot parse complex number '" + text + "'");
}

std::string complex_text(std::complex<double> z) {
  return io::format_double(z.real()) + (z.imag() < 0 ? "-" : "+") + io::format_double(std::abs(z.imag())) +
         "i";
}

std::size_t single(const std::vector<std::size_t>& v, const char* flag, std::size_t fallback) {
  if (v.empty()) return fallback;
  if (v.size() > 1) throw ValidationError(std::string("--") + flag + " takes a single value here");
  return v.front();
}

fs::path output_root(const RunConfig& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("KS_OUT_DIR"); env && *env) return env;
  return "ks_out";
}

void require_format(const RunConfig& c) {
  if (c.format != "csv" && c.format != "json") throw ValidationError("--format must be csv or json");
}

DataMatrix load_or_generate(const RunConfig& c, std::size_t n_default, std::size_t p_default) {
  if (!c.input.empty()) return io::parse_data_csv(io::read_file(c.input));
  return generate(single(c.p, "p", p_default), single(c.n, "n", n_default), parse_marginal(c.marginal),
                  c.seed, c.threads);
}

std::string matrix_json(const SymmetricMatrix& m, const json& config) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.order(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.order(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"order", m.order()}, {"matrix", rows}, {"config", config}}.dump(2) + "\n";
}

void print_summary(std::size_t n, std::size_t p, const SymmetricMatrix* m, const Spectrum* s) {
  std::cout << "n=" << n << " p=" << p << " q=" << io::format_double(linear_ratio(n, p))
            << " q_prime=" << io::format_double(quadratic_ratio(n, p));
  if (m) std::cout << " trace/p=" << io::format_double(m->trace() / static_cast<double>(p));
  if (s) {
    std::cout << " min_eig=" << io::format_double(s->min()) << " max_eig=" << io::format_double(s->max());
  }
  std::cout << "\n";
}

void print_small_matrix(const SymmetricMatrix& m) {
  if (m.order() > 8) return;
  for (std::size_t i = 0; i < m.order(); ++i) {
    for (std::size_t j = 0; j < m.order(); ++j) std::cout << (j ? " " : "") << io::format_double(m(i, j));
    std::cout << "\n";
  }
}

std::string base_name(std::string_view what, std::size_t n, std::size_t p, std::uint64_t seed) {
  return std::string(what) + "_" + std::to_string(n) + "_" + std::to_string(p) + "_" + std::to_string(seed);
}

int cmd_gen(const RunConfig& c) {
  require_format(c);
  const auto x = generate(single(c.p, "p", 1), single(c.n, "n", 2), parse_marginal(c.marginal), c.seed,
                          c.threads);
  const auto path = output_root(c) / (base_name("data", x.n(), x.p(), c.seed) + "." + c.format);
  if (c.format == "csv") {
    io::atomic_write(path, io::data_csv(x, to_json(c)));
  } else {
    json rows = json::array();
    for (std::size_t k = 0; k < x.p(); ++k) rows.push_back(std::vector<double>(x.row(k).begin(), x.row(k).end()));
    io::atomic_write(path, json{{"p", x.p()}, {"n", x.n()}, {"marginal", std::string(to_string(x.marginal()))},
                                {"seed", c.seed}, {"values", rows}, {"config", to_json(c)}}
                               .dump(2) + "\n");
  }
  print_summary(x.n(), x.p(), nullptr, nullptr);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int write_matrix(const RunConfig& c, std::string_view what, const DataMatrix& x, const SymmetricMatrix& m,
                 MatrixSource source) {
  require_format(c);
  const auto path = output_root(c) / (base_name(what, x.n(), x.p(), c.seed) + "." + c.format);
  io::atomic_write(path, c.format == "csv" ? io::symmetric_csv(m, to_json(c)) : matrix_json(m, to_json(c)));
  const auto s = eigenvalues(m, {x.n(), x.p(), source});
  print_summary(x.n(), x.p(), &m, &s);
  print_small_matrix(m);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_tau(const RunConfig& c) {
  const auto x = load_or_generate(c, 70, 100);
  const Kernel kernel = Kernel::parse(c.kernel);
  const auto tau = kernel.name() == "sign" ? tau_fast(x, c.threads) : tau_kernel(x, kernel);
  return write_matrix(c, "tau", x, tau, MatrixSource::tau);
}

int cmd_hmat(const RunConfig& c) {
  const auto x = load_or_generate(c, 70, 100);
  const auto h = h_matrix(hoeffding_parts(x, parse_mode(c.mode), Kernel::parse(c.kernel)));
  return write_matrix(c, "h", x, h, MatrixSource::h);
}

int cmd_spectrum(const RunConfig& c) {
  require_format(c);
  const auto x = load_or_generate(c, 70, 1225);
  const auto source = parse_source(c.matrix);
  if (source == MatrixSource::custom) throw ValidationError("--matrix must be tau or h");
  const Kernel kernel = Kernel::parse(c.kernel);
  SymmetricMatrix m = source == MatrixSource::tau
                          ? (kernel.name() == "sign" ? tau_fast(x, c.threads) : tau_kernel(x, kernel))
                          : h_matrix(hoeffding_parts(x, parse_mode(c.mode), kernel));
  const auto s = eigenvalues(m, {x.n(), x.p(), source});
  const auto config = to_json(c);
  const auto stem = output_root(c) / base_name(std::string(to_string(source)) + "_spectrum", x.n(), x.p(), c.seed);
  if (c.format == "csv") {
    io::atomic_write(stem.string() + ".csv", io::spectrum_csv(s, config));
  } else {
    const auto values = s.eigenvalues();
    io::atomic_write(stem.string() + ".json",
                     json{{"n", x.n()}, {"p", x.p()}, {"q", s.meta().q()}, {"q_prime", s.meta().q_prime()},
                          {"source", std::string(to_string(source))},
                          {"eigenvalues", std::vector<double>(values.begin(), values.end())},
                          {"config", config}}
                             .dump(2) + "\n");
  }
  auto hist = io::histogram_json(esd(s).histogram(c.bins), s.meta());
  hist["config"] = config;
  io::atomic_write(stem.string() + ".hist.json", hist.dump(2) + "\n");
  print_summary(x.n(), x.p(), &m, &s);
  std::cout << "wrote " << stem.string() << "." << c.format << "\n";
  return 0;
}

int cmd_law(const RunConfig& c, std::optional<double> q, double scale, double shift) {
  std::optional<MPLaw> law;
  std::size_t n = 0, p = 0;
  if (q) {
    law.emplace(*q, scale, shift);
  } else {
    n = single(c.n, "n", 70);
    p = single(c.p, "p", 1225);
    if (c.regime != "linear" && c.regime != "quadratic") {
      throw ValidationError("--regime must be linear or quadratic");
    }
    law = law_for_regime(n, p, c.regime == "linear" ? Regime::linear : Regime::quadratic);
  }
  json summary = {{"q", law->q()},
                  {"scale", law->scale()},
                  {"shift", law->shift()},
                  {"lower_edge", law->lower_edge()},
                  {"upper_edge", law->upper_edge()},
                  {"atom_mass", law->atom_mass()},
                  {"moments", {law->moment(1), law->moment(2), law->moment(3), law->moment(4)}},
                  {"config", to_json(c)}};
  json st = json::array();
  for (const auto& text : c.z) {
    const auto z = parse_complex(text);
    const auto g = law->stieltjes(z);
    st.push_back({{"z", complex_text(z)}, {"g", {g.real(), g.imag()}}});
    std::cout << "g(" << complex_text(z) << ") = " << complex_text(g) << "\n";
  }
  summary["stieltjes"] = st;
  const std::string stem = q ? "law_q" + io::format_double(*q) : base_name("law_" + c.regime, n, p, 0);
  const auto root = output_root(c);
  io::atomic_write(root / (stem + ".grid.csv"), io::law_grid_csv(*law));
  io::atomic_write(root / (stem + ".json"), summary.dump(2) + "\n");
  std::cout << "q=" << io::format_double(law->q()) << " support=[" << io::format_double(law->lower_edge()) << ", "
            << io::format_double(law->upper_edge()) << "] atom=" << io::format_double(law->atom_mass()) << "\n";
  std::cout << "wrote " << (root / (stem + ".grid.csv")).string() << "\n";
  return 0;
}

int cmd_alpha(const RunConfig& c) {
  AlphaOptions opts;
  opts.samples = c.samples;
  const auto est = alpha_coefficient(Kernel::parse(c.kernel), parse_marginal(c.marginal), c.seed, opts);
  std::cout << "alpha=" << io::format_double(est.value) << " se=" << io::format_double(est.standard_error)
            << " samples=" << est.samples << (est.closed_form_inner ? " inner=closed_form" : " inner=monte_carlo")
            << "\n";
  return 0;
}

int cmd_figure(const RunConfig& c) {
  const auto root = output_root(c);
  json summary;
  if (c.target == "fig1") {
    summary = make_figure_h_histogram(single(c.n, "n", 70), single(c.p, "p", 1225), c.seed, c.bins, root, to_json(c));
    std::cout << "fig1 ks=" << io::format_double(summary["ks"].get<double>())
              << " q_prime=" << io::format_double(summary["q_prime"].get<double>()) << "\n";
  } else if (c.target == "fig2") {
    const auto p_list = c.p.empty() ? std::vector<std::size_t>{300, 400, 500, 600} : c.p;
    summary = make_figure_tau_histograms(single(c.n, "n", 70), p_list, c.seed, c.bins, root, to_json(c));
    for (const auto& panel : summary["panels"]) {
      std::cout << "fig2 p=" << panel["p"].get<std::size_t>()
                << " mean_eig=" << io::format_double(panel["mean_eigenvalue"].get<double>()) << "\n";
    }
  } else {
    throw ValidationError("unknown figure '" + c.target + "' (expected fig1 or fig2)");
  }
  io::atomic_write(root / (c.target + ".summary.json"), summary.dump(2) + "\n");
  std::cout << "wrote " << root.string() << "\n";
  return 0;
}

int cmd_experiment(const RunConfig& c) {
  if (!is_known_experiment(c.target)) {
    std::cerr << "unknown experiment '" << c.target << "'; known:";
    for (const auto& name : experiment_names()) std::cerr << " " << name;
    std::cerr << "\n";
    return kExitUsage;
  }
  ExperimentRequest req;
  if (c.target == "concentration") {
    req.n_list = c.n;
  } else if (!c.n.empty()) {
    req.n = single(c.n, "n", 0);
  }
  req.p_list = c.p;
  for (const auto& text : c.z) req.zs.push_back(parse_complex(text));
  req.kernel = c.kernel;
  req.q_prime = c.q_prime;
  auto& o = req.options;
  o.first_seed = c.seed;
  o.seeds = c.seeds;
  o.marginal = parse_marginal(c.marginal);
  o.mode = parse_mode(c.mode);
  o.threads = c.threads;
  o.decay_seeds = c.decay_seeds;
  o.bins = c.bins;
  o.config = to_json(c);
  const auto root = output_root(c);
  o.artifact_dir = root / c.target;

  auto report = run_named_experiment(c.target, req);
  auto j = to_json(report);
  j["config"] = o.config;
  const auto path = root / (c.target + ".report.json");
  io::atomic_write(path, j.dump(2) + "\n");
  for (const auto& m : report.metrics) {
    std::cout << (m.pass() ? "  ok   " : "  FAIL ") << m.name << " = " << io::format_double(m.value);
    if (m.comparison != Comparison::info) {
      std::cout << " (" << j["metrics"][&m - report.metrics.data()]["comparison"].get<std::string>() << " "
                << io::format_double(m.threshold) << ")";
    }
    std::cout << "\n";
  }
  std::cout << c.target << ": " << (report.passed() ? "PASS" : "FAIL") << "\nwrote " << path.string() << "\n";
  return report.passed() ? 0 : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kendall rank correlation matrices: data, spectra, limiting laws and experiments"};
  app.require_subcommand(1);
  RunConfig c;
  std::optional<double> law_q;
  double law_scale = 1.0, law_shift = 0.0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--n", c.n, "sample size (comma list where a list makes sense)")->delimiter(',');
    sub->add_option("--p", c.p, "dimension (comma list for fig2 and tau-quadratic)")->delimiter(',');
    sub->add_option("--seed", c.seed, "seed, or first seed of a multi-seed run");
    sub->add_option("--seeds", c.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
    sub->add_option("--marginal", c.marginal, "uniform01 | standard_gaussian | standard_cauchy");
    sub->add_option("--mode", c.mode, "exact_cdf | empirical_rank");
    sub->add_option("--kernel", c.kernel, "sign | sine | additive");
    sub->add_option("--bins", c.bins, "histogram bins (0 = Freedman-Diaconis, floor 30)");
    sub->add_option("--out", c.out, "output directory (default $KS_OUT_DIR or ./ks_out)");
    sub->add_option("--format", c.format, "csv | json");
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--z", c.z, "complex points such as 1+0.5i")->delimiter(',');
  };

  auto* gen = app.add_subcommand("gen", "generate a p x n data matrix");
  auto* tau = app.add_subcommand("tau", "Kendall matrix tau");
  auto* hmat = app.add_subcommand("hmat", "Hoeffding projection matrix H");
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of tau or H");
  auto* law = app.add_subcommand("law", "Marchenko-Pastur law grid, edges, moments and Stieltjes values");
  auto* alpha = app.add_subcommand("alpha", "kernel variance coefficient alpha");
  auto* figure = app.add_subcommand("figure", "figure data (fig1 | fig2)");
  auto* experiment = app.add_subcommand("experiment", "run a named experiment and write its report");
  for (auto* sub : {gen, tau, hmat, spectrum, law, alpha, figure, experiment}) common(sub);
  for (auto* sub : {tau, hmat, spectrum}) sub->add_option("--input", c.input, "data CSV instead of generating");
  spectrum->add_option("--matrix", c.matrix, "tau | h");
  law->add_option("--regime", c.regime, "linear | quadratic (uses --n and --p)");
  law->add_option("--q", law_q, "ratio for a free-standing law");
  law->add_option("--scale", law_scale, "scale a in aY + b");
  law->add_option("--shift", law_shift, "shift b in aY + b");
  alpha->add_option("--samples", c.samples, "outer Monte Carlo samples");
  figure->add_option("which", c.target, "fig1 | fig2")->required();
  experiment->add_option("name", c.target, "experiment name")->required();
  experiment->add_option("--q-prime", c.q_prime, "q' for the concentration sweep");
  experiment->add_option("--decay-seeds", c.decay_seeds, "seeds for the larger confirmation run (0 skips)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    c.subcommand = app.get_subcommands().front()->get_name();
    if (c.subcommand == "gen") return cmd_gen(c);
    if (c.subcommand == "tau") return cmd_tau(c);
    if (c.subcommand == "hmat") return cmd_hmat(c);
    if (c.subcommand == "spectrum") return cmd_spectrum(c);
    if (c.subcommand == "law") return cmd_law(c, law_q, law_scale, law_shift);
    if (c.subcommand == "alpha") return cmd_alpha(c);
    if (c.subcommand == "figure") return cmd_figure(c);
    return cmd_experiment(c);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
