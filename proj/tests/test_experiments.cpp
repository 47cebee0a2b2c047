#include <gtest/gtest.h>

#include "kendall_lab/errors.hpp"
#include "kendall_lab/experiments.hpp"
#include "kendall_lab/io.hpp"

using namespace kendall_lab;

namespace {

ExperimentOptions small(std::size_t seeds, unsigned threads = 1) {
  ExperimentOptions o;
  o.seeds = seeds;
  o.threads = threads;
  o.decay_seeds = 0;
  return o;
}

}  // namespace

TEST(Experiments, RankBoundSmall) {
  const auto r = verify_rank_bound(20, 100, small(3));
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  EXPECT_LE(r.find("max_rank_tau_minus_h")->value, 100.0);
}

TEST(Experiments, ZeroOnset) {
  const auto r = verify_zero_onset(10, 60, small(3));
  EXPECT_TRUE(r.passed());
  EXPECT_GE(r.find("min_near_zero_eigenvalues")->value, 15.0);
}

TEST(Experiments, CovarianceTable) {
  const auto r = verify_covariance_table(20, 50, small(20));
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
}

TEST(Experiments, QuadraticLsdReducedScale) {
  const auto r = run_quadratic_lsd(40, 400, small(2));
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
}

TEST(Experiments, ResolventIdentityFewSeeds) {
  const auto r = verify_resolvent_identity(20, 40, default_z_grid(), small(100));
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
}

TEST(Experiments, ThreadsDoNotChangeReports) {
  const auto one = to_json(run_quadratic_lsd(30, 225, small(3, 1)));
  const auto many = to_json(run_quadratic_lsd(30, 225, small(3, 4)));
  EXPECT_EQ(one.dump(), many.dump());
  EXPECT_EQ(to_json(verify_rank_bound(15, 60, small(4, 1))).dump(),
            to_json(verify_rank_bound(15, 60, small(4, 3))).dump());
}

TEST(Experiments, ArtifactsAreWrittenAndReproducible) {
  const auto dir = std::filesystem::temp_directory_path() / "kendall_lab_experiment_test";
  std::filesystem::remove_all(dir);
  auto o = small(1);
  o.artifact_dir = dir;
  o.config = {{"case", "artifacts"}};
  const auto r = run_quadratic_lsd(30, 225, o);
  ASSERT_EQ(r.artifacts.size(), 3U);
  std::vector<std::string> first;
  for (const auto& a : r.artifacts) first.push_back(io::read_file(a));
  run_quadratic_lsd(30, 225, o);
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(io::read_file(r.artifacts[i]), first[i]);
  std::filesystem::remove_all(dir);
}

TEST(Experiments, MetricComparisons) {
  ExperimentReport r;
  r.add("a", 0.1, Comparison::le, 0.1);
  r.add("b", 2.0, Comparison::gt, 1.0);
  r.info("c", 99.0);
  EXPECT_TRUE(r.passed());
  r.add("d", 1.0, Comparison::lt, 1.0);
  EXPECT_FALSE(r.passed());
  EXPECT_FALSE(to_json(r)["pass"].get<bool>());
  EXPECT_EQ(r.find("zzz"), nullptr);
}

TEST(Experiments, NamedDispatch) {
  EXPECT_TRUE(is_known_experiment("rank-bound"));
  EXPECT_FALSE(is_known_experiment("nope"));
  EXPECT_THROW(run_named_experiment("nope", {}), ValidationError);
  ExperimentRequest req;
  req.n = 12;
  req.p_list = {40};
  req.options = small(2);
  EXPECT_EQ(run_named_experiment("zero-onset", req).name, "zero-onset");
}

TEST(Experiments, InputValidation) {
  EXPECT_THROW(run_quadratic_lsd(70, 20000, small(1)), ValidationError);
  EXPECT_THROW(verify_resolvent_identity(30, 80, {{1.0, 0.01}}, small(2)), ValidationError);
  EXPECT_THROW(verify_concentration({30}, 0.5, {1.0, 0.5}, small(5)), ValidationError);
  EXPECT_THROW(run_tau_quadratic(70, {}, small(1)), ValidationError);
}

TEST(Experiments, AdditiveKernelCollapses) {
  const auto r = run_kernel_generalization(Kernel::additive(), 30, 225, small(1), 0.0);
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
}
