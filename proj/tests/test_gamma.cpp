#include <cmath>
#include <filesystem>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <Eigen/Eigenvalues>

#include "lrdbreak/gamma.hpp"

using namespace lrdbreak;

namespace {

double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

GammaKey small_lrd_key() {
  GammaKey k;
  k.regime = Regime::lrd;
  k.scales = {4, 8, 12};
  k.base_scale = 4;
  k.replicates = 200;
  k.seed = 99;
  return k;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lrdbreak_test_" + name);
}

}  // namespace

TEST(GammaAnalytic, SelfCorrelationIsOne) {
  const auto w = poly4_wavelet();
  for (double h : {0.3, 0.7})
    for (double r : {1.0, 2.5}) {
      const double c = detail::fbm_coefficient_covariance(w, h, r, r, 0.0);
      EXPECT_GT(c, 0.0);
      EXPECT_NEAR(c / std::sqrt(c * c), 1.0, 1e-15);
      // Scaling: Var of the coefficient at scale r a grows like r^{2H+1} relative to r = 1.
      const double c1 = detail::fbm_coefficient_covariance(w, h, 1.0, 1.0, 0.0);
      EXPECT_NEAR(c / c1, std::pow(r, 2 * h + 1), 1e-6 * std::pow(r, 2 * h + 1));
    }
}

TEST(GammaAnalytic, BrownianMotionGivesWhiteNoiseLimit) {
  const auto w = poly4_wavelet();
  const std::vector<double> r{1, 2, 3, 4, 5};
  // Disjoint blocks of Brownian motion have independent coefficients.
  for (double delta : {1.0, 2.0, -1.0, 3.5})
    EXPECT_NEAR(detail::fbm_coefficient_covariance(w, 0.5, 1.0, 1.0, delta), 0.0, 1e-12);
  const auto g = gamma_fbm_analytic(0.5, r, w);
  for (std::size_t p = 0; p < r.size(); ++p)
    EXPECT_NEAR(g.matrix(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)), 2 * r[p], 1e-8);
  EXPECT_DOUBLE_EQ(g.alpha, 2.0);
  EXPECT_TRUE(g.warnings.empty());
}

TEST(GammaAnalytic, SymmetricPositiveDefinite) {
  for (double h : {0.2, 0.55, 0.85}) {
    const auto g = gamma_fbm_analytic(h, {1, 2, 3, 4, 5}, poly4_wavelet());
    EXPECT_TRUE(g.matrix.isApprox(g.matrix.transpose(), 1e-14));
    EXPECT_GT(min_eig(g.matrix), 0.0) << "H=" << h;
  }
}

TEST(GammaAnalytic, Errors) {
  EXPECT_THROW(gamma_fbm_analytic(1.0, {1, 2, 3}, poly4_wavelet()), Error);
  EXPECT_THROW(gamma_fbm_analytic(0.5, {1, 2, 3}, poly4_wavelet(), 10), Error);
}

TEST(GammaMonteCarlo, WhiteNoiseDiagonal) {
  MonteCarloSettings mc;
  mc.replicates = 600;
  mc.seed = 5;
  const std::vector<std::size_t> scales{10, 20, 30, 40, 50};
  const auto g = gamma_mc(0.0, Regime::lrd, scales, 10, poly4_wavelet(), mc);
  EXPECT_EQ(g.n_ref, 6000u);
  for (Eigen::Index p = 0; p < 5; ++p) {
    const double target = 2.0 * static_cast<double>(p + 1);
    EXPECT_NEAR(g.matrix(p, p), target, 0.1 * target) << "p=" << p;
  }
}

TEST(GammaMonteCarlo, AgreesWithAnalyticFbm) {
  const std::vector<std::size_t> scales{16, 32, 48, 64, 80};
  const std::vector<double> r{1, 2, 3, 4, 5};
  for (double h : {0.55, 0.7, 0.85}) {
    MonteCarloSettings mc;
    mc.replicates = 600;
    mc.seed = 11;
    const auto emp = gamma_mc(2 * h + 1, Regime::fbm, scales, 16, poly4_wavelet(), mc).matrix;
    const auto ana = gamma_fbm_analytic(h, r, poly4_wavelet()).matrix;
    EXPECT_LT((emp - ana).norm() / ana.norm(), 0.15) << "H=" << h;
  }
}

TEST(GammaMonteCarlo, DeterministicSymmetricPositive) {
  MonteCarloSettings mc;
  mc.replicates = 201;  // odd count exercises the unpaired last path
  const std::vector<std::size_t> scales{4, 8, 12};
  const auto a = gamma_mc(0.4, Regime::lrd, scales, 4, poly4_wavelet(), mc);
  const auto b = gamma_mc(0.4, Regime::lrd, scales, 4, poly4_wavelet(), mc);
  EXPECT_EQ(a.matrix, b.matrix);
  EXPECT_TRUE(a.matrix.isApprox(a.matrix.transpose(), 1e-14));
  EXPECT_GT(min_eig(a.matrix), 0.0);
  EXPECT_EQ(a.multipliers, (std::vector<double>{1, 2, 3}));
}

TEST(GammaMonteCarlo, Errors) {
  MonteCarloSettings mc;
  const std::vector<std::size_t> scales{4, 8, 12};
  mc.replicates = 199;
  EXPECT_THROW(gamma_mc(0.4, Regime::lrd, scales, 4, poly4_wavelet(), mc), Error);
  mc.replicates = 200;
  mc.n_ref = 1000;
  EXPECT_THROW(gamma_mc(0.4, Regime::lrd, scales, 4, poly4_wavelet(), mc), Error);
  mc.n_ref = 0;
  for (double bad : {-0.1, 1.0}) {
    try {
      gamma_mc(bad, Regime::lrd, scales, 4, poly4_wavelet(), mc);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::alpha_out_of_range);
    }
  }
  EXPECT_THROW(gamma_mc(1.0, Regime::fbm, scales, 4, poly4_wavelet(), mc), Error);
  EXPECT_THROW(gamma_mc(3.0, Regime::fbm, scales, 4, poly4_wavelet(), mc), Error);
  EXPECT_EQ(reference_hurst(Regime::fbm, 2.4), 0.7);
  EXPECT_EQ(reference_hurst(Regime::lrd, 0.4), 0.7);
}

TEST(GammaTable, NodeRanges) {
  GammaTable lrd(small_lrd_key());
  EXPECT_EQ(lrd.first_node(), 0);
  EXPECT_EQ(lrd.last_node(), 19);
  auto k = small_lrd_key();
  k.regime = Regime::fbm;
  k.method = GammaMethod::analytic_fbm;
  GammaTable fbm(k);
  EXPECT_NEAR(GammaTable::node_alpha(fbm.first_node()), 1.05, 1e-12);
  EXPECT_NEAR(GammaTable::node_alpha(fbm.last_node()), 2.95, 1e-12);
  auto bad = small_lrd_key();
  bad.method = GammaMethod::analytic_fbm;
  EXPECT_THROW(GammaTable{bad}, Error);
}

TEST(GammaTable, InterpolatesLinearlyAndContinuously) {
  GammaTable t(small_lrd_key());
  const auto g6 = t.node(6), g7 = t.node(7);
  EXPECT_TRUE(t.at(0.30).isApprox(g6, 1e-14));
  EXPECT_TRUE(t.at(0.3125).isApprox(0.75 * g6 + 0.25 * g7, 1e-12));
  // Approaching a node from either side gives the same matrix.
  const double eps = 1e-7;
  EXPECT_LT((t.at(0.35 - eps) - t.at(0.35 + eps)).norm(), 1e-4 * g7.norm());
  EXPECT_LT((t.at(0.35 - eps) - g7).norm(), 1e-4 * g7.norm());
  for (int i = 0; i <= 19; ++i) {
    const auto g = t.node(i);
    EXPECT_TRUE(g.isApprox(g.transpose(), 1e-14));
    EXPECT_GT(min_eig(g), 0.0) << "node " << i;
  }
}

TEST(GammaTable, ClampsOutOfRangeWithWarning) {
  GammaTable t(small_lrd_key());
  std::vector<Warning> w;
  const auto g = t.at(0.99, &w);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].code, "alpha_clamped");
  EXPECT_EQ(g, t.node(19));
  w.clear();
  EXPECT_EQ(t.at(-0.2, &w), t.node(0));
  EXPECT_EQ(w.size(), 1u);
  EXPECT_THROW(t.at(std::nan("")), Error);
}

TEST(GammaTable, ConcurrentLookupsAgree) {
  GammaTable t(small_lrd_key());
  std::vector<Eigen::MatrixXd> out(4);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < out.size(); ++i) threads.emplace_back([&, i] { out[i] = t.at(0.42); });
  for (auto& th : threads) th.join();
  for (const auto& m : out) EXPECT_EQ(m, out[0]);
  EXPECT_EQ(t.cached_nodes(), 2u);
}

TEST(GammaTable, JsonRoundTrip) {
  GammaTable t(small_lrd_key());
  t.node(3);
  t.node(11);
  const auto path = temp_file("gamma_roundtrip.json");
  t.save(path);
  const auto back = GammaTable::load(path);
  EXPECT_EQ(back.key(), t.key());
  EXPECT_EQ(back.cached_nodes(), 2u);
  GammaTable copy = back;
  EXPECT_EQ(copy.node(3), t.node(3));
  EXPECT_EQ(copy.node(11), t.node(11));
  EXPECT_EQ(back.to_json()["version"], "lrdbreak-gamma-table/1");
  std::filesystem::remove(path);
}

TEST(GammaTable, LoadOrCreateRejectsOtherKeys) {
  GammaTable t(small_lrd_key());
  t.node(0);
  const auto path = temp_file("gamma_mismatch.json");
  t.save(path);
  auto other = small_lrd_key();
  other.seed = 100;
  std::vector<Warning> w;
  const auto fresh = GammaTable::load_or_create(path, other, &w);
  EXPECT_EQ(fresh.cached_nodes(), 0u);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].code, "gamma_table_mismatch");
  EXPECT_EQ(GammaTable::load_or_create(path, small_lrd_key()).cached_nodes(), 1u);
  {
    std::ofstream(path) << "{\"version\": \"other\"}";
  }
  try {
    GammaTable::load(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::table_mismatch);
  }
  std::filesystem::remove(path);
  EXPECT_EQ(GammaTable::load_or_create(path, small_lrd_key()).cached_nodes(), 0u);
}

TEST(GammaKey, FileStemDistinguishesKeys) {
  auto a = small_lrd_key(), b = small_lrd_key();
  b.replicates = 300;
  EXPECT_NE(a.file_stem(), b.file_stem());
  b = a;
  b.correction = MomentCorrection::none;
  EXPECT_NE(a.file_stem(), b.file_stem());
  EXPECT_EQ(a.file_stem(), small_lrd_key().file_stem());
}
