#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rmdshrink/detector.hpp"

namespace {

using rmd::Variant;

oracle::Mat contaminated(std::uint64_t seed, int n = 80, int p = 4) {
  std::mt19937_64 g(seed);
  oracle::Mat x = oracle::random_normal(g, n, p);
  x.topRows(n / 10).array() += 12.0;
  return x;
}

TEST(Variants, TableRows) {
  using M = rmd::LocationMethod;
  const std::vector<std::pair<M, M>> want{{M::CCM, M::CCM},   {M::ShCCM, M::CCM}, {M::ShCCM, M::ShCCM},
                                          {M::MM, M::MM},     {M::ShMM, M::MM},   {M::ShMM, M::ShMM}};
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_EQ(rmd::location_method(rmd::kAllVariants[k]), want[k].first);
    EXPECT_EQ(rmd::comedian_center_method(rmd::kAllVariants[k]), want[k].second);
  }
  EXPECT_EQ(rmd::parse_variant("v3"), Variant::v3);
  EXPECT_FALSE(rmd::parse_variant("v7").has_value());
  EXPECT_FALSE(rmd::parse_variant("x1").has_value());
}

TEST(Detect, FlagsMatchThresholdAndDistance) {
  const oracle::Mat x = contaminated(1);
  for (auto v : rmd::kAllVariants) {
    const auto r = rmd::detect(x, v);
    EXPECT_DOUBLE_EQ(r.threshold, rmd::chi2_quantile(4, 0.975));
    auto [loc, scat] = rmd::scatter_for_variant(x, v);
    const oracle::Mat inv = oracle::gauss_jordan_inverse(scat.matrix.matrix());
    for (int i = 0; i < x.rows(); ++i) {
      const oracle::Vec y = x.row(i).transpose() - loc.center;
      EXPECT_NEAR(r.d2(i), y.dot(inv * y), 1e-8 * std::max(1.0, r.d2(i)));
      EXPECT_EQ(r.flags[static_cast<std::size_t>(i)], r.d2(i) > r.threshold);
    }
    EXPECT_EQ(r.eta_location.has_value(), rmd::is_shrinkage(rmd::location_method(v)));
    for (int i = 0; i < 8; ++i) EXPECT_TRUE(r.flags[static_cast<std::size_t>(i)]) << rmd::to_string(v);
  }
}

TEST(Detect, ScalePermutationAndShiftInvariance) {
  std::mt19937_64 g(2);
  for (int rep = 0; rep < 10; ++rep) {
    const oracle::Mat x = contaminated(10 + rep);
    const std::vector<int> cols{3, 1, 0, 2};
    oracle::Mat perm(x.rows(), 4);
    for (int j = 0; j < 4; ++j) perm.col(j) = x.col(cols[static_cast<std::size_t>(j)]);
    const oracle::Vec general = oracle::random_normal(g, 4, 1) * 20.0;
    const oracle::Vec along_e = oracle::Vec::Constant(4, -6.5);
    for (auto v : rmd::kAllVariants) {
      const auto base = rmd::detect(x, v);
      const auto scaled = rmd::detect(x * 0.37, v);
      EXPECT_EQ(scaled.flags, base.flags);
      for (int i = 0; i < x.rows(); ++i) EXPECT_NEAR(scaled.d2(i), base.d2(i), 1e-8 * std::max(1.0, base.d2(i)));
      EXPECT_EQ(rmd::detect(perm, v).flags, base.flags);

      oracle::Mat shifted = x;
      shifted.rowwise() += along_e.transpose();
      EXPECT_EQ(rmd::detect(shifted, v).flags, base.flags);
      if (v == Variant::v1 || v == Variant::v4) {
        shifted = x;
        shifted.rowwise() += general.transpose();
        const auto moved = rmd::detect(shifted, v);
        EXPECT_EQ(moved.flags, base.flags);
        for (int i = 0; i < x.rows(); ++i) EXPECT_NEAR(moved.d2(i), base.d2(i), 1e-8 * std::max(1.0, base.d2(i)));
      }
    }
  }
}

TEST(Detect, HigherQuantileFlagsSubset) {
  const oracle::Mat x = contaminated(3);
  for (auto v : rmd::kAllVariants) {
    rmd::DetectOptions lo, hi;
    lo.quantile = 0.9;
    hi.quantile = 0.999;
    const auto a = rmd::detect(x, v, lo), b = rmd::detect(x, v, hi);
    EXPECT_LT(a.threshold, b.threshold);
    for (std::size_t i = 0; i < a.flags.size(); ++i)
      if (b.flags[i]) EXPECT_TRUE(a.flags[i]);
  }
}

TEST(Detect, Errors) {
  EXPECT_THROW(rmd::detect(oracle::Mat::Constant(20, 3, 1.0), Variant::v1), rmd::Error);
  oracle::Mat bad = contaminated(4);
  bad(3, 2) = NAN;
  EXPECT_THROW(rmd::detect(bad, Variant::v6), rmd::Error);
  rmd::DetectOptions q;
  q.quantile = 1.0;
  EXPECT_THROW(rmd::detect(contaminated(4), Variant::v1, q), rmd::Error);
}

TEST(Detect, WarnsWhenFewRows) {
  std::mt19937_64 g(6);
  const oracle::Mat x = oracle::random_normal(g, 5, 5);
  const auto r = rmd::detect(x, Variant::v1);
  EXPECT_FALSE(r.warnings.empty());
}

}  // namespace
