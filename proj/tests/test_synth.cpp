#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lrdbreak/synth.hpp"
#include "support/oracles.hpp"

using namespace lrdbreak;

TEST(FgnAutocovariance, WhiteNoiseHasNoCorrelation) {
  for (long long k = 1; k < 50; ++k) EXPECT_DOUBLE_EQ(fgn_autocovariance(0.5, 2.0, k), 0.0);
}

TEST(FgnAutocovariance, LagZeroIsVariance) {
  EXPECT_DOUBLE_EQ(fgn_autocovariance(0.8, 1.0, 0), 1.0);
  EXPECT_DOUBLE_EQ(fgn_autocovariance(0.3, 2.5, 0), 2.5);
}

TEST(FgnAutocovariance, LagOneMatchesArithmetic) {
  const double expected = (std::pow(2.0, 1.6) - 2.0) / 2.0;
  EXPECT_NEAR(fgn_autocovariance(0.8, 1.0, 1), expected, 1e-15);
  EXPECT_NEAR(expected, 0.51572, 1e-5);
}

TEST(FgnAutocovariance, RejectsBadArguments) {
  EXPECT_THROW(fgn_autocovariance(0.0, 1.0, 1), Error);
  EXPECT_THROW(fgn_autocovariance(1.0, 1.0, 1), Error);
  EXPECT_THROW(fgn_autocovariance(0.7, 0.0, 1), Error);
  EXPECT_THROW(fgn_autocovariance(0.7, 1.0, -1), Error);
  try {
    fgn_autocovariance(1.2, 1.0, 0);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain_error);
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

TEST(FarimaAutocovariance, MatchesGammaFunctionRatio) {
  for (double d : {0.1, 0.25, 0.4}) {
    const auto g = farima_autocovariance(d, 1.0, 30);
    EXPECT_NEAR(g[0], std::tgamma(1 - 2 * d) / std::pow(std::tgamma(1 - d), 2), 1e-12);
    for (std::size_t k : {1u, 5u, 29u}) {
      const double kk = static_cast<double>(k);
      const double direct = std::tgamma(1 - 2 * d) * std::tgamma(kk + d) /
                            (std::tgamma(d) * std::tgamma(1 - d) * std::tgamma(kk + 1 - d));
      EXPECT_NEAR(g[k], direct, 1e-10 * std::abs(direct)) << "d=" << d << " k=" << k;
    }
  }
  EXPECT_THROW(farima_autocovariance(0.5, 1.0, 4), Error);
  EXPECT_THROW(farima_autocovariance(0.0, 1.0, 4), Error);
}

TEST(GaussianSampler, CirculantIsNonNegativeForFgnAndFarima) {
  for (double h : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    GaussianSampler s(autocovariance(StationarySpec::fgn(h), 4097));
    EXPECT_GE(s.min_eigenvalue_ratio(), -1e-9) << "H=" << h;
    EXPECT_FALSE(s.uses_cholesky());
  }
  for (double d : {0.05, 0.2, 0.45}) {
    GaussianSampler s(autocovariance(StationarySpec::farima(d), 4097));
    EXPECT_GE(s.min_eigenvalue_ratio(), -1e-9) << "d=" << d;
  }
}

TEST(GaussianSampler, FallsBackToCholeskyForSmallIndefiniteEmbedding) {
  // Gaussian kernel exp(-(k/3)^2): positive definite, but its minimal circulant embedding is not.
  std::vector<double> acov;
  for (int k = 0; k < 4; ++k) acov.push_back(std::exp(-(k / 3.0) * (k / 3.0)));
  GaussianSampler s(acov);
  EXPECT_LT(s.min_eigenvalue_ratio(), -1e-9);
  EXPECT_TRUE(s.uses_cholesky());
  Rng rng(3);
  EXPECT_EQ(s.draw(rng).size(), 4u);
}

TEST(GaussianSampler, LargeIndefiniteEmbeddingFails) {
  std::vector<double> acov(3000, 0.0);
  acov[0] = 1.0;
  acov[1] = 0.9;
  acov[2] = 0.7;
  acov[3] = 0.3;
  try {
    GaussianSampler s(acov);
    FAIL() << "expected an embedding failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::embedding_failed);
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
  }
}

TEST(GaussianSampler, PairedDrawsAreUncorrelated) {
  GaussianSampler s(autocovariance(StationarySpec::fgn(0.7), 2048));
  double cross = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(11, r));
    auto [a, b] = s.draw_pair(rng);
    cross += a[100] * b[100];
  }
  EXPECT_LT(std::abs(cross / reps), 4.0 / std::sqrt(reps));
}

TEST(GenStationary, WhiteNoiseLagOne) {
  const auto x = gen_stationary(StationarySpec::white(), 1000, 5).values;
  ASSERT_EQ(x.size(), 1000u);
  EXPECT_LT(std::abs(oracle::autocov_zero_mean(x, 1)), 4.0 / std::sqrt(1000.0));
}

TEST(GenStationary, FgnLagOneWithinFiveStandardErrors) {
  const std::size_t n = 4096;
  const auto g = autocovariance(StationarySpec::fgn(0.8), n);
  const auto x = gen_stationary(StationarySpec::fgn(0.8), n, 17).values;
  // Sample autocovariance about the known mean; long memory inflates the error, so use Bartlett's formula.
  const double se = oracle::autocov_standard_error(g, 1, n);
  EXPECT_LT(std::abs(oracle::autocov_zero_mean(x, 1) - 0.51572), 5 * se);
}

TEST(GenStationary, FarimaVarianceWithinFiveStandardErrors) {
  const std::size_t n = 4096;
  const auto g = autocovariance(StationarySpec::farima(0.4), n);
  const double g0 = std::tgamma(1 - 0.8) / std::pow(std::tgamma(0.6), 2);
  EXPECT_NEAR(g[0], g0, 1e-12);
  const auto x = gen_stationary(StationarySpec::farima(0.4), n, 29).values;
  EXPECT_LT(std::abs(oracle::autocov_zero_mean(x, 0) - g0), 5 * oracle::autocov_standard_error(g, 0, n));
}

TEST(GenStationary, SameSeedSameBits) {
  const auto a = gen_stationary(StationarySpec::farima(0.3), 1000, 77).values;
  const auto b = gen_stationary(StationarySpec::farima(0.3), 1000, 77).values;
  const auto c = gen_stationary(StationarySpec::farima(0.3), 1000, 78).values;
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(GenStationary, RejectsShortOrInvalid) {
  EXPECT_THROW(gen_stationary(StationarySpec::white(), 1, 1), Error);
  EXPECT_THROW(gen_stationary(StationarySpec::farima(0.6), 100, 1), Error);
  EXPECT_THROW(gen_stationary(StationarySpec::fgn(0.5, -1.0), 100, 1), Error);
}

TEST(GenFbm, StartsAtZero) {
  for (double h : {0.2, 0.5, 0.8}) {
    const auto ts = gen_fbm(h, 1.0, 512, 3);
    ASSERT_EQ(ts.values.size(), 513u);
    EXPECT_EQ(ts.values[0], 0.0);
  }
}

TEST(GenFbm, RandomWalkVarianceGrowsLinearly) {
  const std::size_t n = 1000;
  double acc = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    const double v = gen_fbm(0.5, 2.0, n, derive_seed(5, r)).values[n];
    acc += v * v;
  }
  const double ratio = acc / reps / static_cast<double>(n);
  EXPECT_NEAR(ratio, 2.0, 5 * 2.0 * std::sqrt(2.0 / reps));
}

TEST(GenFbm, SelfSimilarVariance) {
  const int reps = 500;
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    const double v = gen_fbm(0.7, 1.0, 2048, derive_seed(9, r)).values[1024];
    acc += v * v;
  }
  EXPECT_NEAR(acc / reps / std::pow(1024.0, 1.4), 1.0, 0.10);
}

TEST(GenPiecewise, BoundariesFollowFloorRule) {
  PiecewiseSpec s;
  s.n_samples = 1000;
  s.change_fractions = {0.3, 0.777};
  s.segments = {StationarySpec::white(), StationarySpec::white(4.0), StationarySpec::white(0.25)};
  const auto b = s.boundaries();
  EXPECT_EQ(b, (std::vector<std::size_t>{0, 300, 777, 1001}));
  s.seed = 4;
  const auto ts = gen_piecewise(s);
  EXPECT_EQ(ts.values.size(), 1001u);
  ASSERT_TRUE(ts.truth.has_value());
  EXPECT_EQ(*ts.truth, s);
}

TEST(GenPiecewise, SegmentsCarryTheirOwnVariance) {
  PiecewiseSpec s;
  s.n_samples = 30000;
  s.change_fractions = {0.5};
  s.segments = {StationarySpec::fgn(0.7, 1.0), StationarySpec::fgn(0.7, 9.0)};
  s.seed = 12;
  const auto x = gen_piecewise(s).values;
  std::vector<double> a(x.begin(), x.begin() + 15000), b(x.begin() + 15000, x.end());
  const auto g = autocovariance(StationarySpec::fgn(0.7), 15000);
  const double se = oracle::autocov_standard_error(g, 0, 15000);
  EXPECT_LT(std::abs(oracle::autocov_zero_mean(a, 0) - 1.0), 5 * se);
  EXPECT_LT(std::abs(oracle::autocov_zero_mean(b, 0) / 9.0 - 1.0), 5 * se);
  // Gaussian marginals on each segment (thinned to weaken dependence).
  for (const auto* seg : {&a, &b}) {
    const double sd = std::sqrt(oracle::autocov_zero_mean(*seg, 0));
    std::vector<double> z;
    for (std::size_t i = 0; i < seg->size(); i += 50) z.push_back((*seg)[i] / sd);
    EXPECT_GT(oracle::ks_pvalue(oracle::ks_statistic(z, oracle::normal_cdf), z.size()), 0.001);
  }
}

TEST(GenPiecewise, SingleSegmentEqualsDirectGenerator) {
  PiecewiseSpec s;
  s.n_samples = 500;
  s.segments = {FbmSpec{0.6, 1.0}};
  s.seed = 8;
  const auto pw = gen_piecewise(s).values;
  const auto direct = gen_fbm(0.6, 1.0, 500, derive_seed(8, 0)).values;
  EXPECT_EQ(pw, direct);
}

TEST(GenPiecewise, FbmSegmentsRestartUnlessPasted) {
  PiecewiseSpec s;
  s.n_samples = 2000;
  s.change_fractions = {0.5};
  s.segments = {FbmSpec{0.6, 1.0}, FbmSpec{0.8, 1.0}};
  s.seed = 2;
  const auto plain = gen_piecewise(s).values;
  EXPECT_EQ(plain[0], 0.0);
  EXPECT_EQ(plain[1000], 0.0);
  s.level_pasting = true;
  const auto pasted = gen_piecewise(s).values;
  EXPECT_DOUBLE_EQ(pasted[1000], pasted[999]);
  EXPECT_DOUBLE_EQ(pasted[1500] - pasted[1000], plain[1500] - plain[1000]);
}

TEST(PiecewiseSpec, Validation) {
  PiecewiseSpec s;
  s.n_samples = 100;
  s.change_fractions = {0.5};
  s.segments = {StationarySpec::white()};
  EXPECT_THROW(s.validate(), Error);  // m+1 specs required
  s.segments.push_back(StationarySpec::white());
  EXPECT_NO_THROW(s.validate());
  s.change_fractions = {0.0};
  EXPECT_THROW(s.validate(), Error);
  s.change_fractions = {0.6, 0.4};
  s.segments.push_back(StationarySpec::white());
  EXPECT_THROW(s.validate(), Error);
  s.change_fractions = {0.5, 0.505};
  EXPECT_THROW(s.validate(), Error);  // middle segment of one sample
}

TEST(TimeSeries, RejectsNonFiniteAndShort) {
  TimeSeries t{{1.0}, {}};
  EXPECT_THROW(t.validate(), Error);
  t.values = {0.0, std::nan("")};
  EXPECT_THROW(t.validate(), Error);
  t.values = {0.0, 1.0};
  EXPECT_NO_THROW(t.validate());
}
