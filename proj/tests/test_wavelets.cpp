#include <cmath>

#include <gtest/gtest.h>

#include "lrdbreak/wavelets.hpp"

using namespace lrdbreak;

TEST(Poly4, PointValues) {
  EXPECT_EQ(psi_poly4(0.0), 0.0);
  EXPECT_EQ(psi_poly4(1.0), 0.0);
  EXPECT_NEAR(psi_poly4(0.5), -0.0125, 1e-16);
  EXPECT_EQ(psi_poly4(-0.1), 0.0);
  EXPECT_EQ(psi_poly4(1.2), 0.0);
  // Symmetric about 1/2.
  for (double t : {0.05, 0.2, 0.37}) EXPECT_NEAR(psi_poly4(t), psi_poly4(1 - t), 1e-16);
}

TEST(Poly4, TwoVanishingMoments) {
  const auto rep = check_moments(poly4_wavelet(), 2, 1e-10);
  ASSERT_EQ(rep.moments.size(), 3u);
  EXPECT_LT(std::abs(rep.moments[0]), 1e-12);
  EXPECT_LT(std::abs(rep.moments[1]), 1e-12);
  EXPECT_TRUE(rep.violations.empty());
  // t^2 psi(t) = -t^6 + 2t^5 - 1.2t^4 + 0.2t^3, so the second moment is 1/2100.
  const double closed = -1.0 / 7 + 2.0 / 6 - 1.2 / 5 + 0.2 / 4;
  EXPECT_NEAR(closed, 1.0 / 2100, 1e-15);
  EXPECT_NEAR(rep.moments[2], closed, 1e-12);
  EXPECT_GT(std::abs(rep.moments[2]), 1e-4);
}

TEST(CheckMoments, ConstantFunctionIsFlagged) {
  WaveletSpec box{"box", [](double t) { return (t >= 0.0 && t <= 1.0) ? 1.0 : 0.0; }, 0, false, false};
  const auto rep = check_moments(box, 0, 1e-10);
  EXPECT_NEAR(rep.moments[0], 1.0, 1e-12);
  ASSERT_EQ(rep.violations.size(), 1u);
  EXPECT_EQ(rep.violations[0], 0);
  EXPECT_THROW(check_moments(box, -1, 1e-10), Error);
}

TEST(CheckMoments, EveryRegisteredWaveletPasses) {
  for (const auto& name : wavelet_names()) {
    const auto w = find_wavelet(name);
    EXPECT_TRUE(check_moments(w, w.vanishing_moments, 1e-9).violations.empty()) << name;
    if (w.valid_lrd) {
      EXPECT_EQ(w(0.0), 0.0);
      EXPECT_EQ(w(1.0), 0.0);
    }
  }
}

TEST(DiscreteMoment, ConvergesAtRateOneOverA) {
  const auto w = poly4_wavelet();
  const auto q = check_moments(w, 1, 1e-10).moments;
  for (int p : {0, 1}) {
    double prev = 0.0;
    for (std::size_t a : {32u, 64u, 128u}) {
      const double err = std::abs(discrete_moment(w, p, a) - q[static_cast<std::size_t>(p)]);
      EXPECT_LT(err * static_cast<double>(a), 0.1) << "p=" << p << " a=" << a;
      if (prev > 0.0) {
        EXPECT_LT(err, prev);
      }
      prev = err;
    }
  }
}

TEST(Registry, LookupAndRegimeSupport) {
  const auto w = find_wavelet("poly4");
  EXPECT_EQ(w.name, "poly4");
  EXPECT_TRUE(w.supports(Regime::lrd));
  EXPECT_TRUE(w.supports(Regime::fbm));
  try {
    find_wavelet("haar");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_wavelet);
  }
  EXPECT_EQ(parse_regime("fbm"), Regime::fbm);
  EXPECT_THROW(parse_regime("arma"), Error);
}
