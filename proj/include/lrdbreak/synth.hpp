#pragma once

// Exact-covariance Gaussian test processes: fractional Gaussian noise,
// FARIMA(0,d,0), white noise, fractional Brownian motion, and piecewise
// concatenations of independent segments.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "lrdbreak/error.hpp"
#include "lrdbreak/fft.hpp"
#include "lrdbreak/rng.hpp"

namespace lrdbreak {

enum class Family { fgn, farima, white_noise };

struct StationarySpec {
  Family family = Family::white_noise;
  double variance_scale = 1.0;  ///< sigma^2: variance (FGN, white) or innovation variance (FARIMA)
  double hurst = 0.5;           ///< FGN only
  double memory = 0.0;          ///< FARIMA only, d in (0, 1/2)

  static StationarySpec fgn(double h, double sigma2 = 1.0) {
    return {Family::fgn, sigma2, h, 0.0};
  }
  static StationarySpec farima(double d, double sigma2 = 1.0) {
    return {Family::farima, sigma2, 0.5, d};
  }
  static StationarySpec white(double sigma2 = 1.0) {
    return {Family::white_noise, sigma2, 0.5, 0.0};
  }

  /// Spectral exponent D in f(lambda) ~ |lambda|^{-D}.
  double long_memory_exponent() const {
    switch (family) {
      case Family::fgn: return 2.0 * hurst - 1.0;
      case Family::farima: return 2.0 * memory;
      case Family::white_noise: return 0.0;
    }
    return 0.0;
  }

  void validate() const {
    if (!(variance_scale > 0.0) || !std::isfinite(variance_scale))
      throw Error(ErrorCode::domain_error, "variance scale must be positive");
    if (family == Family::fgn && !(hurst > 0.0 && hurst < 1.0))
      throw Error(ErrorCode::domain_error, "Hurst index must lie in (0,1)");
    if (family == Family::farima && !(memory > 0.0 && memory < 0.5))
      throw Error(ErrorCode::domain_error, "FARIMA memory d must lie in (0,1/2)");
  }

  friend bool operator==(const StationarySpec&, const StationarySpec&) = default;
};

struct FbmSpec {
  double hurst = 0.5;
  double variance_scale = 1.0;

  void validate() const {
    if (!(hurst > 0.0 && hurst < 1.0))
      throw Error(ErrorCode::domain_error, "Hurst index must lie in (0,1)");
    if (!(variance_scale > 0.0) || !std::isfinite(variance_scale))
      throw Error(ErrorCode::domain_error, "variance scale must be positive");
  }

  friend bool operator==(const FbmSpec&, const FbmSpec&) = default;
};

using SegmentSpec = std::variant<StationarySpec, FbmSpec>;

struct PiecewiseSpec {
  std::size_t n_samples = 0;  ///< N; the series holds X_0..X_N
  std::vector<double> change_fractions;
  std::vector<SegmentSpec> segments;
  std::uint64_t seed = 0;
  bool level_pasting = false;  ///< offset each segment by the previous segment's last value

  std::size_t change_count() const { return change_fractions.size(); }

  void validate() const {
    if (n_samples < 1) throw Error(ErrorCode::invalid_spec, "n_samples must be positive");
    if (segments.size() != change_fractions.size() + 1)
      throw Error(ErrorCode::invalid_spec, "need exactly m+1 segment specs for m change fractions");
    double prev = 0.0;
    for (double tau : change_fractions) {
      if (!(tau > prev && tau < 1.0))
        throw Error(ErrorCode::invalid_spec, "change fractions must be strictly increasing in (0,1)");
      prev = tau;
    }
    for (const auto& s : segments) std::visit([](const auto& v) { v.validate(); }, s);
    auto b = boundaries();
    for (std::size_t j = 0; j + 1 < b.size(); ++j)
      if (b[j + 1] <= b[j] + 1)
        throw Error(ErrorCode::invalid_spec, "segment shorter than two samples");
  }

  /// Segment starts [N tau_j] for j = 0..m, followed by N+1 (one past the last index).
  std::vector<std::size_t> boundaries() const {
    std::vector<std::size_t> b{0};
    for (double tau : change_fractions)
      b.push_back(static_cast<std::size_t>(std::floor(static_cast<double>(n_samples) * tau)));
    b.push_back(n_samples + 1);
    return b;
  }

  friend bool operator==(const PiecewiseSpec&, const PiecewiseSpec&) = default;
};

struct TimeSeries {
  std::vector<double> values;
  std::optional<PiecewiseSpec> truth;

  /// N, the index of the last sample.
  std::size_t last_index() const { return values.empty() ? 0 : values.size() - 1; }

  void validate() const {
    if (values.size() < 2) throw Error(ErrorCode::parse_error, "series needs at least two samples");
    for (double v : values)
      if (!std::isfinite(v)) throw Error(ErrorCode::parse_error, "series contains non-finite values");
  }
};

// ---------------------------------------------------------------------------
// Autocovariances

inline double fgn_autocovariance(double h, double sigma2, long long lag) {
  if (!(h > 0.0 && h < 1.0)) throw Error(ErrorCode::domain_error, "Hurst index must lie in (0,1)");
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::domain_error, "sigma2 must be positive");
  if (lag < 0) throw Error(ErrorCode::domain_error, "lag must be non-negative");
  const double k = static_cast<double>(lag);
  const double e = 2.0 * h;
  return 0.5 * sigma2 * (std::pow(k + 1.0, e) - 2.0 * std::pow(k, e) + std::pow(std::abs(k - 1.0), e));
}

/// gamma(k) = sigma^2 Gamma(1-2d) Gamma(k+d) / (Gamma(d) Gamma(1-d) Gamma(k+1-d)), k = 0..n-1.
inline std::vector<double> farima_autocovariance(double d, double sigma2, std::size_t n) {
  if (!(d > 0.0 && d < 0.5)) throw Error(ErrorCode::domain_error, "FARIMA memory d must lie in (0,1/2)");
  std::vector<double> g(n);
  if (n == 0) return g;
  g[0] = sigma2 * std::exp(std::lgamma(1.0 - 2.0 * d) - 2.0 * std::lgamma(1.0 - d));
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    g[k] = g[k - 1] * (kk - 1.0 + d) / (kk - d);
  }
  return g;
}

inline std::vector<double> autocovariance(const StationarySpec& spec, std::size_t n) {
  spec.validate();
  std::vector<double> g(n, 0.0);
  switch (spec.family) {
    case Family::fgn:
      for (std::size_t k = 0; k < n; ++k)
        g[k] = fgn_autocovariance(spec.hurst, spec.variance_scale, static_cast<long long>(k));
      break;
    case Family::farima:
      g = farima_autocovariance(spec.memory, spec.variance_scale, n);
      break;
    case Family::white_noise:
      if (n > 0) g[0] = spec.variance_scale;
      break;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Exact Gaussian sampling from a stationary autocovariance

/// Circulant embedding of a Toeplitz covariance (Davies-Harte). Eigenvalues are
/// computed once; each draw costs one FFT of length 2(n-1). Falls back to a
/// Cholesky factor for n <= 2048 when the embedding is not non-negative definite.
class GaussianSampler {
 public:
  static constexpr std::size_t cholesky_limit = 2048;
  static constexpr double negative_tolerance = 1e-9;

  explicit GaussianSampler(std::vector<double> acov) : n_(acov.size()) {
    if (n_ == 0) throw Error(ErrorCode::domain_error, "empty autocovariance");
    if (n_ == 1) {
      scale_ = std::sqrt(acov[0]);
      return;
    }
    const std::size_t m = 2 * (n_ - 1);
    std::vector<std::complex<double>> c(m);
    for (std::size_t k = 0; k < n_; ++k) c[k] = acov[k];
    for (std::size_t k = n_; k < m; ++k) c[k] = acov[m - k];
    fft_ = std::make_unique<ForwardFft>(m);
    (*fft_)(c);

    double max_eig = 0.0, min_eig = 0.0;
    for (const auto& v : c) {
      max_eig = std::max(max_eig, v.real());
      min_eig = std::min(min_eig, v.real());
    }
    min_eigenvalue_ratio_ = max_eig > 0.0 ? min_eig / max_eig : -1.0;
    if (min_eig < -negative_tolerance * max_eig) {
      fft_.reset();
      if (n_ > cholesky_limit)
        throw Error(ErrorCode::embedding_failed,
                    "circulant embedding has negative eigenvalues and n exceeds the Cholesky limit");
      build_cholesky(acov);
      return;
    }
    sqrt_eig_.resize(m);
    for (std::size_t k = 0; k < m; ++k)
      sqrt_eig_[k] = std::sqrt(std::max(c[k].real(), 0.0) / static_cast<double>(m));
  }

  std::size_t size() const { return n_; }
  bool uses_cholesky() const { return chol_.size() > 0; }
  /// min eigenvalue / max eigenvalue of the circulant (negative means indefinite).
  double min_eigenvalue_ratio() const { return min_eigenvalue_ratio_; }

  std::vector<double> draw(Rng& rng) const { return draw_pair(rng, false).first; }

  /// Two independent samples. With the circulant route both come from one FFT
  /// (real and imaginary parts); otherwise the second costs a separate draw.
  std::pair<std::vector<double>, std::vector<double>> draw_pair(Rng& rng, bool want_second = true) const {
    std::pair<std::vector<double>, std::vector<double>> out;
    if (n_ == 1 || uses_cholesky()) {
      out.first = draw_direct(rng);
      if (want_second) out.second = draw_direct(rng);
      return out;
    }
    const std::size_t m = sqrt_eig_.size();
    std::vector<std::complex<double>> w(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double re = rng.normal();
      const double im = rng.normal();
      w[k] = sqrt_eig_[k] * std::complex<double>(re, im);
    }
    (*fft_)(w);
    out.first.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) out.first[i] = w[i].real();
    if (want_second) {
      out.second.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) out.second[i] = w[i].imag();
    }
    return out;
  }

 private:
  std::vector<double> draw_direct(Rng& rng) const {
    std::vector<double> out(n_);
    if (n_ == 1) {
      out[0] = scale_ * rng.normal();
      return out;
    }
    if (uses_cholesky()) {
      Eigen::VectorXd z(static_cast<Eigen::Index>(n_));
      for (auto& v : z) v = rng.normal();
      Eigen::VectorXd x = chol_ * z;
      for (std::size_t i = 0; i < n_; ++i) out[i] = x[static_cast<Eigen::Index>(i)];
    }
    return out;
  }

  void build_cholesky(const std::vector<double>& acov) {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = acov[static_cast<std::size_t>(std::abs(i - j))];
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::embedding_failed, "covariance is not positive definite");
    chol_ = llt.matrixL();
  }

  std::size_t n_;
  double scale_ = 0.0;
  double min_eigenvalue_ratio_ = 0.0;
  std::vector<double> sqrt_eig_;
  std::unique_ptr<ForwardFft> fft_;
  Eigen::MatrixXd chol_;
};

/// n samples of the stationary process.
inline TimeSeries gen_stationary(const StationarySpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::domain_error, "need n >= 2");
  spec.validate();
  Rng rng(seed);
  if (spec.family == Family::white_noise) {
    TimeSeries ts;
    ts.values.resize(n);
    const double s = std::sqrt(spec.variance_scale);
    for (auto& v : ts.values) v = s * rng.normal();
    return ts;
  }
  GaussianSampler sampler(autocovariance(spec, n));
  return TimeSeries{sampler.draw(rng), std::nullopt};
}

/// FBM path X_0..X_n with X_0 = 0, built as partial sums of FGN(H, sigma^2).
inline TimeSeries gen_fbm(double h, double sigma2, std::size_t n, std::uint64_t seed) {
  FbmSpec{h, sigma2}.validate();
  if (n < 1) throw Error(ErrorCode::domain_error, "need n >= 1");
  TimeSeries ts;
  ts.values.assign(n + 1, 0.0);
  if (n == 1) {
    Rng rng(seed);
    ts.values[1] = std::sqrt(sigma2) * rng.normal();
    return ts;
  }
  const auto increments = gen_stationary(StationarySpec::fgn(h, sigma2), n, seed).values;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += increments[i];
    ts.values[i + 1] = acc;
  }
  return ts;
}

/// Independent segments; segment j covers indices [N tau_j] .. [N tau_{j+1}] - 1
/// (the last one runs through N). FBM segments restart at 0 unless level pasting is on.
inline TimeSeries gen_piecewise(const PiecewiseSpec& spec) {
  spec.validate();
  const auto b = spec.boundaries();
  TimeSeries ts;
  ts.values.reserve(spec.n_samples + 1);
  for (std::size_t j = 0; j < spec.segments.size(); ++j) {
    const std::size_t len = b[j + 1] - b[j];
    const std::uint64_t seg_seed = derive_seed(spec.seed, j);
    std::vector<double> part = std::visit(
        [&](const auto& s) -> std::vector<double> {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, FbmSpec>)
            return gen_fbm(s.hurst, s.variance_scale, len - 1, seg_seed).values;
          else
            return gen_stationary(s, len, seg_seed).values;
        },
        spec.segments[j]);
    const double offset = (spec.level_pasting && !ts.values.empty()) ? ts.values.back() : 0.0;
    for (double v : part) ts.values.push_back(v + offset);
  }
  ts.truth = spec;
  return ts;
}

}  // namespace lrdbreak
