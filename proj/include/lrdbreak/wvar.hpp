#pragma once

// Discretized wavelet coefficients, block-averaged squared coefficients over a
// segment (the piecewise sample variance), and the per-scale log-variance vector.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lrdbreak/error.hpp"
#include "lrdbreak/synth.hpp"
#include "lrdbreak/wavelets.hpp"

namespace lrdbreak {

inline constexpr double min_scale = 2.0;

/// Base scale a_N, multipliers r_1 < ... < r_l and the integer scales actually used.
struct ScaleGrid {
  Regime regime = Regime::lrd;
  double kappa = std::numeric_limits<double>::quiet_NaN();  ///< NaN when the base scale was given directly
  double base_scale_raw = 0.0;   ///< a_N before rounding
  std::size_t base_scale = 0;    ///< a_N rounded to the nearest integer >= 2
  std::vector<double> multipliers;
  std::vector<std::size_t> scales;  ///< round(r_i * base_scale)

  std::size_t size() const { return scales.size(); }
  std::size_t coarsest() const { return scales.back(); }

  /// log(r_i a_N): the abscissae of the contrast.
  std::vector<double> log_scales() const {
    std::vector<double> v;
    for (auto s : scales) v.push_back(std::log(static_cast<double>(s)));
    return v;
  }

  /// log(r_i) as realized after rounding, i.e. log(scale_i / a_N).
  std::vector<double> log_multipliers() const {
    std::vector<double> v;
    for (auto s : scales) v.push_back(std::log(static_cast<double>(s) / static_cast<double>(base_scale)));
    return v;
  }

  static std::vector<double> default_multipliers(std::size_t l = 5) {
    std::vector<double> r(l);
    std::iota(r.begin(), r.end(), 1.0);
    return r;
  }

  /// Upper bound on kappa for the regime's base-scale rule (FBM bound taken at A = 0).
  static double kappa_upper(Regime regime) { return regime == Regime::lrd ? 2.0 / 15.0 : 2.0 / 3.0; }

  /// a_N = N^{kappa + 1/5} (LRD) or N^{1/3 + kappa} (FBM).
  static double base_scale_rule(Regime regime, std::size_t n, double kappa) {
    if (!(kappa > 0.0 && kappa < kappa_upper(regime)))
      throw Error(ErrorCode::domain_error, "kappa outside the admissible range for the " +
                                               std::string(to_string(regime)) + " regime");
    const double e = regime == Regime::lrd ? kappa + 0.2 : 1.0 / 3.0 + kappa;
    return std::pow(static_cast<double>(n), e);
  }

  static ScaleGrid from_rule(Regime regime, std::size_t n, double kappa, std::vector<double> multipliers) {
    auto g = with_base(regime, base_scale_rule(regime, n, kappa), std::move(multipliers));
    g.kappa = kappa;
    return g;
  }

  static ScaleGrid with_base(Regime regime, double base, std::vector<double> multipliers) {
    if (multipliers.size() < 3) throw Error(ErrorCode::invalid_spec, "need at least three scales");
    for (std::size_t i = 0; i < multipliers.size(); ++i) {
      if (!(multipliers[i] > 0.0)) throw Error(ErrorCode::invalid_spec, "multipliers must be positive");
      if (i > 0 && !(multipliers[i] > multipliers[i - 1]))
        throw Error(ErrorCode::invalid_spec, "multipliers must be strictly increasing");
    }
    if (!(base >= 1.5) || !std::isfinite(base))
      throw Error(ErrorCode::scale_below_minimum, "base scale must round to at least 2");
    ScaleGrid g;
    g.regime = regime;
    g.base_scale_raw = base;
    g.base_scale = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(base)));
    g.multipliers = std::move(multipliers);
    for (double r : g.multipliers) {
      const auto s = static_cast<std::size_t>(std::llround(r * static_cast<double>(g.base_scale)));
      if (s < min_scale) throw Error(ErrorCode::scale_below_minimum, "scale below the minimum of 2");
      if (!g.scales.empty() && s <= g.scales.back())
        throw Error(ErrorCode::invalid_spec, "multipliers collapse to duplicate integer scales");
      g.scales.push_back(s);
    }
    return g;
  }
};

/// How the sampled wavelet is adjusted before use.
enum class MomentCorrection {
  none,       ///< taps psi(j/a)/sqrt(a) exactly
  zero_mean,  ///< interior taps shifted so they sum to exactly zero
};

/// Taps of psi((p-b)/a)/sqrt(a) for p - b = 0..a at an integer scale.
class DiscreteFilter {
 public:
  DiscreteFilter(const WaveletSpec& w, std::size_t scale, MomentCorrection corr = MomentCorrection::zero_mean)
      : scale_(scale), taps_(scale + 1) {
    if (static_cast<double>(scale) < min_scale)
      throw Error(ErrorCode::scale_below_minimum, "scale below the minimum of 2");
    const double norm = 1.0 / std::sqrt(static_cast<double>(scale));
    for (std::size_t j = 0; j <= scale; ++j)
      taps_[j] = w(static_cast<double>(j) / static_cast<double>(scale)) * norm;
    if (corr == MomentCorrection::zero_mean) {
      // Keep zero end taps at zero so neighbouring blocks never share a sample.
      const bool zero_ends = taps_.front() == 0.0 && taps_.back() == 0.0 && scale >= 2;
      const std::size_t lo = zero_ends ? 1 : 0;
      const std::size_t hi = zero_ends ? scale - 1 : scale;
      double mean = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) mean += taps_[j];
      mean /= static_cast<double>(hi - lo + 1);
      for (std::size_t j = lo; j <= hi; ++j) taps_[j] -= mean;
    }
  }

  std::size_t scale() const { return scale_; }
  std::span<const double> taps() const { return taps_; }

  /// e_X(a, b) with b = a * block; samples p >= 1 only.
  double apply(std::span<const double> x, std::size_t block) const {
    const std::size_t b = scale_ * block;
    double s = 0.0;
    for (std::size_t j = (b == 0 ? 1 : 0); j <= scale_; ++j) s += taps_[j] * x[b + j];
    return s;
  }

 private:
  std::size_t scale_;
  std::vector<double> taps_;
};

/// e_X(a,b) = a^{-1/2} sum_{p=1}^{N} psi((p-b)/a) X_p, summed over the support only.
inline double wavelet_coeff(std::span<const double> x, const WaveletSpec& w, double a, double b) {
  if (!(a >= min_scale)) throw Error(ErrorCode::scale_below_minimum, "scale below the minimum of 2");
  const double n = static_cast<double>(x.size()) - 1.0;
  if (b < 0.0 || b + a > n) throw Error(ErrorCode::invalid_coefficient, "wavelet support leaves [0, N]");
  const auto lo = static_cast<std::size_t>(std::max(1.0, std::ceil(b)));
  const auto hi = static_cast<std::size_t>(std::floor(b + a));
  double s = 0.0;
  for (std::size_t p = lo; p <= hi; ++p) s += w((static_cast<double>(p) - b) / a) * x[p];
  return s / std::sqrt(a);
}

/// Squared coefficients e^2(s_i, s_i p) at every full block of every scale, with
/// prefix sums so any segment variance costs O(1).
class CoefficientCache {
 public:
  struct Level {
    std::size_t scale = 0;
    std::vector<double> squared;     ///< block p valid iff s(p+1) <= N
    std::vector<long double> prefix; ///< prefix[p] = sum of the first p squares
  };

  CoefficientCache() = default;

  CoefficientCache(std::span<const double> x, const std::vector<std::size_t>& scales, const WaveletSpec& w,
                   MomentCorrection corr = MomentCorrection::zero_mean)
      : n_(x.size() - 1) {
    if (x.size() < 2) throw Error(ErrorCode::parse_error, "series needs at least two samples");
    for (auto s : scales) {
      DiscreteFilter f(w, s, corr);
      std::vector<double> sq(n_ / s);
      for (std::size_t p = 0; p < sq.size(); ++p) {
        const double e = f.apply(x, p);
        sq[p] = e * e;
      }
      levels_.push_back(make_level(s, std::move(sq)));
    }
  }

  CoefficientCache(const TimeSeries& ts, const ScaleGrid& grid, const WaveletSpec& w,
                   MomentCorrection corr = MomentCorrection::zero_mean)
      : CoefficientCache(std::span<const double>(ts.values), grid.scales, w, corr) {}

  /// Cache over precomputed squared coefficients (scale i gets squared[i]).
  static CoefficientCache from_squared(std::size_t n, const std::vector<std::size_t>& scales,
                                       std::vector<std::vector<double>> squared) {
    CoefficientCache c;
    c.n_ = n;
    for (std::size_t i = 0; i < scales.size(); ++i) {
      if (squared[i].size() != n / scales[i])
        throw Error(ErrorCode::invalid_spec, "squared coefficient count must equal floor(N / scale)");
      c.levels_.push_back(make_level(scales[i], std::move(squared[i])));
    }
    return c;
  }

  std::size_t last_index() const { return n_; }
  std::size_t scale_count() const { return levels_.size(); }
  const Level& level(std::size_t i) const { return levels_.at(i); }

  /// Number of blocks of scale i that S_k^{k'} averages over.
  std::size_t block_count(std::size_t k, std::size_t k2, std::size_t i) const {
    const auto s = levels_[i].scale;
    return k2 / s - k / s;
  }

  /// S_k^{k'}(s_i) = s_i/(k'-k) * sum_{p=[k/s_i]}^{[k'/s_i]-1} e^2(s_i, s_i p).
  double segment_variance(std::size_t k, std::size_t k2, std::size_t i) const {
    if (!(k < k2 && k2 <= n_)) throw Error(ErrorCode::invalid_spec, "segment bounds must satisfy 0 <= k < k' <= N");
    const auto& lv = levels_.at(i);
    const std::size_t lo = k / lv.scale;
    const std::size_t hi = k2 / lv.scale;
    if (hi < lo + 2)
      throw Error(ErrorCode::too_few_blocks, "segment [" + std::to_string(k) + ", " + std::to_string(k2) +
                                                 ") holds fewer than two blocks at scale " +
                                                 std::to_string(lv.scale));
    const long double sum = lv.prefix[hi] - lv.prefix[lo];
    return static_cast<double>(static_cast<long double>(lv.scale) * sum / static_cast<long double>(k2 - k));
  }

  /// Y_i = log S_k^{k'}(s_i) for every scale.
  std::vector<double> log_variance_vector(std::size_t k, std::size_t k2) const {
    std::vector<double> y(levels_.size());
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      const double s = segment_variance(k, k2, i);
      if (!(s > 0.0) || !std::isfinite(s))
        throw Error(ErrorCode::degenerate_segment, "non-positive wavelet variance on segment [" +
                                                       std::to_string(k) + ", " + std::to_string(k2) + ")");
      y[i] = std::log(s);
    }
    return y;
  }

 private:
  static Level make_level(std::size_t s, std::vector<double> sq) {
    Level lv{s, std::move(sq), {}};
    lv.prefix.resize(lv.squared.size() + 1);
    lv.prefix[0] = 0.0L;
    for (std::size_t p = 0; p < lv.squared.size(); ++p)
      lv.prefix[p + 1] = lv.prefix[p] + static_cast<long double>(lv.squared[p]);
    return lv;
  }

  std::size_t n_ = 0;
  std::vector<Level> levels_;
};

}  // namespace lrdbreak
