#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rmdshrink/simulation.hpp"

namespace {

using rmd::Family;

rmd::ScenarioSpec spec(Family f, int p, int n, double alpha, double delta = 10, double lambda = 1) {
  rmd::ScenarioSpec s;
  s.family = f;
  s.p = p;
  s.n = n;
  s.alpha = alpha;
  s.delta = delta;
  s.lambda = lambda;
  s.reps = 4;
  s.seed = 99;
  s.id = "t";
  return s;
}

TEST(Generators, DeterministicWithExactTruthCounts) {
  for (auto f : {Family::NormalMixture, Family::T3Mixture, Family::ExpMixture, Family::AffineTransformed,
                 Family::BreakdownSymmetric, Family::BreakdownAsymmetric}) {
    for (double a : {0.0, 0.1, 0.3, 0.45}) {
      const auto s = spec(f, 5, 100, a);
      const auto x = rmd::generate(s, 17), y = rmd::generate(s, 17);
      EXPECT_EQ(x.data, y.data);
      EXPECT_NE(x.data, rmd::generate(s, 18).data);
      const auto k = std::count(x.truth.begin(), x.truth.end(), true);
      EXPECT_EQ(k, static_cast<long>(std::floor(a * 100 + 1e-9)));
      for (long i = 0; i < k; ++i) EXPECT_TRUE(x.truth[static_cast<std::size_t>(i)]);
    }
  }
  EXPECT_EQ(rmd::contaminated_count(0.3, 10), 3);  // 0.3 * 10 is 2.9999... in binary
}

TEST(Generators, NormalMixtureMoments) {
  const auto s = spec(Family::NormalMixture, 3, 200000, 0.5, 4.0, 0.25);
  const auto x = rmd::generate(s, 1);
  const oracle::Mat bad = x.data.topRows(100000), good = x.data.bottomRows(100000);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(bad.col(j).mean(), 4.0, 0.01);
    EXPECT_NEAR(good.col(j).mean(), 0.0, 0.01);
    EXPECT_NEAR((bad.col(j).array() - 4.0).square().mean(), 0.25, 0.005);
    EXPECT_NEAR(good.col(j).array().square().mean(), 1.0, 0.02);
  }
}

TEST(Generators, ExponentialMedians) {
  const auto s = spec(Family::ExpMixture, 2, 100000, 0.5, 10.0);
  const auto x = rmd::generate(s, 2);
  EXPECT_GE(rmd::generate(spec(Family::ExpMixture, 3, 500, 0.0), 3).data.minCoeff(), 0.0);
  for (int j = 0; j < 2; ++j) {
    std::vector<double> bad(x.data.col(j).data(), x.data.col(j).data() + 50000);
    EXPECT_NEAR(oracle::median(bad), std::log(2.0) + 10.0, 0.02);
  }
}

TEST(Generators, T3Variance) {
  // Var of t3 with unit scale is 3; use the robust interquartile check instead
  // of the heavy-tailed variance: the t3 quartile is 0.7648923.
  const auto x = rmd::generate(spec(Family::T3Mixture, 1, 200000, 0.0), 4);
  std::vector<double> a(x.data.data(), x.data.data() + x.data.size());
  for (auto& v : a) v = std::abs(v);
  EXPECT_NEAR(oracle::median(a), 0.7648923, 0.01);
}

TEST(Generators, CorrelatedStructure) {
  EXPECT_THROW(rmd::generate(spec(Family::CorrelatedNormal, 5, 100, 0.1), 1), rmd::Error);
  const oracle::Mat P = rmd::correlated_target();
  EXPECT_EQ(Eigen::LLT<oracle::Mat>(P).info(), Eigen::Success);
  const auto x = rmd::generate(spec(Family::CorrelatedNormal, 6, 100000, 0.0), 5);
  const oracle::Mat c = x.data.rowwise() - x.data.colwise().mean();
  const oracle::Mat cov = c.transpose() * c / 99999.0;
  EXPECT_NEAR(cov(0, 1) / std::sqrt(cov(0, 0) * cov(1, 1)), 0.95, 0.01);
  EXPECT_NEAR(cov(3, 4), -0.499, 0.02);
}

TEST(Generators, AffineTransform) {
  const auto s = spec(Family::AffineTransformed, 7, 50, 0.2);
  const auto a = rmd::gen_affine_transformed_detail(s, 6);
  const oracle::Mat& t = a.orthogonal;
  EXPECT_LT((t.transpose() * t - oracle::Mat::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GE(a.scales.minCoeff(), 1e-6);
  EXPECT_LT(a.scales.maxCoeff(), 1.0);
  const auto base = rmd::generate(spec(Family::NormalMixture, 7, 50, 0.2), 6);
  EXPECT_LT((a.sample.data - base.data * a.transform.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Generators, Breakdown) {
  auto s = spec(Family::BreakdownAsymmetric, 3, 20, 0.1);
  const auto x = rmd::generate(s, 7);
  EXPECT_EQ(x.data.row(0), oracle::Mat::Constant(1, 3, 100.0));
  EXPECT_EQ(x.data.row(1), oracle::Mat::Constant(1, 3, 200.0));
  s.family = Family::BreakdownSymmetric;
  const auto y = rmd::generate(s, 7);
  const auto base = rmd::generate(spec(Family::NormalMixture, 3, 20, 0.0), 7);
  EXPECT_NEAR(y.data.row(1).norm(), 200.0 * base.data.row(1).norm(), 1e-9);
  EXPECT_EQ(y.data.row(5), base.data.row(5));
}

TEST(Metrics, Examples) {
  const std::vector<bool> truth{true, true, false, false, false};
  auto m = rmd::metrics({true, false, true, false, false}, truth);
  EXPECT_DOUBLE_EQ(m.c, 0.5);
  EXPECT_DOUBLE_EQ(m.f, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.fscore, 0.5);
  m = rmd::metrics({false, false, false}, {false, false, false});
  EXPECT_DOUBLE_EQ(m.c, 1.0);
  EXPECT_DOUBLE_EQ(m.f, 0.0);
  m = rmd::metrics({false, true}, {true, false});
  EXPECT_DOUBLE_EQ(m.fscore, 0.0);
  EXPECT_THROW(rmd::metrics({true}, {true, false}), rmd::Error);
}

TEST(RunScenario, ReproducibleAcrossThreadCounts) {
  auto s = spec(Family::NormalMixture, 4, 60, 0.2);
  s.reps = 6;
  rmd::RunOptions one, many;
  one.threads = 1;
  many.threads = 4;
  auto a = rmd::run_scenario(s, one), b = rmd::run_scenario(s, many);
  a.wall_seconds = b.wall_seconds = 0;
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.c.size(), 6u);
  double mean = 0;
  for (double c : a.c) mean += c / 6;
  EXPECT_DOUBLE_EQ(a.c_mean, mean);
}

TEST(RunScenario, ReportsFailingReplicate) {
  auto s = spec(Family::NormalMixture, 4, 2, 0.0);
  s.reps = 2;
  try {
    rmd::run_scenario(s);
    FAIL() << "expected an error";
  } catch (const rmd::Error& e) {
    EXPECT_NE(std::string(e.what()).find("replicate 0"), std::string::npos);
  }
}

TEST(Bench, MedianOfMeasurements) {
  const auto s = spec(Family::NormalMixture, 3, 50, 0.1);
  const auto b = rmd::bench_variant(s, rmd::Variant::v6, 3);
  EXPECT_EQ(b.seconds.size(), 3u);
  std::vector<double> t = b.seconds;
  EXPECT_DOUBLE_EQ(b.median_seconds, oracle::median(t));
  EXPECT_THROW(rmd::bench_variant(s, rmd::Variant::v6, 2), rmd::Error);
}

}  // namespace
