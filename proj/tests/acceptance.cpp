// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>

#include "kendall_lab/experiments.hpp"
#include "kendall_lab/io.hpp"
#include "kendall_lab/kendall.hpp"
#include "kendall_lab/laws.hpp"
#include "test_support.hpp"

using namespace kendall_lab;
using cplx = std::complex<double>;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string failures(const ExperimentReport& r) {
  std::string s;
  for (const auto& m : r.metrics) {
    if (!m.pass()) s += " " + m.name + "=" + num(m.value) + "/" + num(m.threshold);
  }
  return s;
}

ExperimentOptions seeds(std::size_t count, std::size_t decay = 0) {
  ExperimentOptions o;
  o.seeds = count;
  o.decay_seeds = decay;
  o.threads = std::max(1U, std::thread::hardware_concurrency());
  return o;
}

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick_p(1, 10), pick_n(2, 50);
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const auto x = generate(pick_p(rng), pick_n(rng), static_cast<Marginal>(t % 3), 5000 + t);
    const auto naive = tau_naive(x);
    if (!(naive == tau_fast(x)) || !(naive == tau_from_signs(pair_signs(x)))) ++mismatches;
  }
  const auto fixture = kendall_lab::testing::rows({{1, 2, 3}, {3, 1, 2}});
  const bool hand = tau_fast(fixture)(0, 1) == -1.0 / 3.0 && tau_naive(fixture)(0, 1) == -1.0 / 3.0 &&
                    tau_from_signs(pair_signs(fixture))(0, 1) == -1.0 / 3.0;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {mismatches == 0 && hand && secs < 10.0,
          std::to_string(mismatches) + " mismatches in 200, fixture " + (hand ? "-1/3" : "wrong") + ", " +
              num(secs) + " s"};
}

Outcome quadratic_lsd() {
  const auto r = run_quadratic_lsd(70, 1225, seeds(5, 1));
  const double qp = quadratic_ratio(70, 1225);
  return {r.passed() && qp == 2450.0 / 4830.0,
          "q'=" + num(qp) + " mean KS " + num(r.find("mean_ks_h_vs_law")->value) + ", at (140,4900) " +
              num(r.find("larger_size_mean_ks")->value) + failures(r)};
}

Outcome linear_lsd() {
  const auto r = run_linear_lsd(2000, 200, seeds(1));
  return {r.passed(), "KS " + num(r.find("max_ks_tau_vs_law")->value) + ", wrong-law KS " +
                          num(r.find("min_ks_vs_wrong_law")->value) + failures(r)};
}

Outcome rank_bound() {
  bool ok = true;
  std::string detail;
  for (auto [n, p] : {std::pair<std::size_t, std::size_t>{20, 100}, {30, 300}, {70, 600}}) {
    const auto r = verify_rank_bound(n, p, seeds(3));
    ok = ok && r.passed();
    detail += "(" + std::to_string(n) + "," + std::to_string(p) + ") rank " +
              num(r.find("max_rank_tau_minus_h")->value) + " slack " +
              num(r.find("max_ks_minus_rank_over_p")->value) + "; ";
    detail += failures(r);
  }
  return {ok, detail};
}

Outcome covariance_table() {
  const auto r = verify_covariance_table(20, 50, seeds(20));
  return {r.passed(), "gaps " + num(r.find("equal_pairs_gap")->value) + ", " +
                          num(r.find("shared_index_pairs_gap")->value) + ", " +
                          num(r.find("disjoint_pairs_gap")->value) + " over >= " +
                          num(r.find("min_effective_samples")->value) + " samples" + failures(r)};
}

Outcome resolvent_identity() {
  const auto r = verify_resolvent_identity(30, 80, {{1.0, 0.5}, {0.5, 1.0}}, seeds(2000));
  std::string detail;
  for (const auto& m : r.metrics) {
    if (m.name.rfind("identity_gap", 0) == 0) detail += m.name + " " + num(m.value) + " <= " + num(m.threshold) + "; ";
  }
  return {r.passed(), detail + failures(r)};
}

Outcome law_internals() {
  boost::math::quadrature::tanh_sinh<double> ts;
  double worst_norm = 0.0, worst_inversion = 0.0;
  for (double q : {0.1, 0.5, 1.0, 2.0, 17.5}) {
    const MPLaw law(q);
    const double mass = law.atom_mass() +
                        ts.integrate([&](double x) { return law.density(x); }, law.lower_edge(), law.upper_edge());
    worst_norm = std::max(worst_norm, std::abs(mass - 1.0));
    for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double x = law.lower_edge() + t * (law.upper_edge() - law.lower_edge());
      const double recovered = -law.stieltjes({x, 1e-6}).imag() / std::numbers::pi;
      worst_inversion = std::max(worst_inversion, std::abs(recovered - law.density(x)));
    }
  }
  const double m_lin = MPLaw(0.1, 2.0 / 3.0, 1.0 / 3.0).moment(1);
  const double m_quad = MPLaw(0.5, 1.0 / 3.0).moment(1);
  const bool ok = worst_norm <= 1e-8 && worst_inversion <= 1e-4 && std::abs(m_lin - 1.0) <= 1e-10 &&
                  std::abs(m_quad - 1.0 / 3.0) <= 1e-10;
  return {ok, "normalization " + num(worst_norm) + ", inversion " + num(worst_inversion) + ", means " +
                  io::format_double(m_lin) + " / " + io::format_double(m_quad)};
}

Outcome zero_onset() {
  const auto r = verify_zero_onset(10, 60, seeds(5));
  return {r.passed(), num(r.find("min_near_zero_eigenvalues")->value) + " eigenvalues <= tol_eig (need 15)" +
                          failures(r)};
}

Outcome kernel_generalization() {
  using boost::math::quadrature::gauss;
  const Kernel sine = Kernel::sine();
  auto u = [&](double x) { return gauss<double, 40>::integrate([&](double y) { return sine(x, y); }, 0.0, 1.0); };
  const double second = gauss<double, 40>::integrate(
      [&](double x) { return gauss<double, 40>::integrate([&](double y) { return sine(x, y) * sine(x, y); }, 0.0, 1.0); },
      0.0, 1.0);
  const double alpha = second - 2.0 * gauss<double, 40>::integrate([&](double x) { return u(x) * u(x); }, 0.0, 1.0);

  const auto sign = run_kernel_generalization(Kernel::sign(), 70, 1225, seeds(5), 1.0 / 3.0);
  const auto additive = run_kernel_generalization(Kernel::additive(), 70, 1225, seeds(2));
  const auto sine_run = run_kernel_generalization(sine, 70, 1225, seeds(3), alpha);
  return {sign.passed() && additive.passed() && sine_run.passed(),
          "sign KS " + num(sign.find("mean_ks_h_phi_vs_alpha_law")->value) + ", additive in-band " +
              num(additive.find("min_fraction_in_collapse_band")->value) + ", sine alpha " + num(alpha) + " KS " +
              num(sine_run.find("mean_ks_h_phi_vs_alpha_law")->value) + failures(sign) + failures(additive) +
              failures(sine_run)};
}

Outcome concentration() {
  const auto r = verify_concentration({30, 50, 70}, 0.5, {1.0, 0.5}, seeds(200));
  std::string detail = "variances";
  for (const auto& row : r.details["per_n"]) detail += " " + num(row["variance"].get<double>());
  return {r.passed(), detail + failures(r)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 tau oracle equivalence", oracle_equivalence},
      {"AC2 H spectrum vs (1/3)Y_q' at n=70 p=1225", quadratic_lsd},
      {"AC3 tau spectrum vs 1/3+(2/3)Y_q at n=2000 p=200", linear_lsd},
      {"AC4 KS(tau,H) <= rank(tau-H)/p and rank <= 5n", rank_bound},
      {"AC5 Hoeffding residual covariance table", covariance_table},
      {"AC6 resolvent identity within 3 SE", resolvent_identity},
      {"AC7 Marchenko-Pastur law internals", law_internals},
      {"AC8 zero-eigenvalue onset at n=10 p=60", zero_onset},
      {"AC9 kernel generalization", kernel_generalization},
      {"AC10 Stieltjes concentration trend", concentration},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
