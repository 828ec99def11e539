#pragma once

// Per-segment inference after detection: trim each detected segment away from
// the estimated breakpoints, then OLS and FGLS estimates of (alpha, log beta)
// with their asymptotic covariances, confidence intervals and the chi-square
// goodness-of-fit statistic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>

#include "lrdbreak/error.hpp"
#include "lrdbreak/gamma.hpp"
#include "lrdbreak/regression.hpp"
#include "lrdbreak/segmentation.hpp"
#include "lrdbreak/wvar.hpp"

namespace lrdbreak {

inline constexpr double ci_z = 1.96;     // 95% two-sided normal quantile
inline constexpr double max_spread = 0.49;

/// Exponent spread A = |sup H - inf H| from detected slopes; only meaningful for
/// FBM, where alpha = 2H + 1. Clamped to [0, 0.49].
inline double exponent_spread(const ChangePointResult& r, Regime regime, std::vector<Warning>* warnings = nullptr) {
  if (regime != Regime::fbm || r.segments.size() < 2) return 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : r.segments) {
    lo = std::min(lo, s.ols.alpha);
    hi = std::max(hi, s.ols.alpha);
  }
  const double a = 0.5 * (hi - lo);
  if (a > max_spread && warnings)
    warnings->push_back(Warning{"spread_clamped", "estimated Hurst spread " + std::to_string(a) +
                                                      " clamped to 0.49; rate guarantees need A < 1/2"});
  return std::clamp(a, 0.0, max_spread);
}

/// kappa implied by a base scale: a = N^{1/5 + kappa} (LRD) or N^{1/3 + kappa} (FBM).
inline double implied_kappa(Regime regime, std::size_t n, double base_scale) {
  return std::log(base_scale) / std::log(static_cast<double>(n)) - (regime == Regime::lrd ? 0.2 : 1.0 / 3.0);
}

/// v_N = N^{2/5 - 3 kappa} (LRD) or N^{2/3 (1 - 2A) - kappa (2 + 4A)} (FBM).
inline double rate_v(Regime regime, std::size_t n, double kappa, double spread) {
  const double e = regime == Regime::lrd ? 0.4 - 3.0 * kappa
                                         : (2.0 / 3.0) * (1.0 - 2.0 * spread) - kappa * (2.0 + 4.0 * spread);
  return std::pow(static_cast<double>(n), e);
}

struct RefineOptions {
  /// Each side's trim is at most this fraction of the detected segment length.
  double margin_cap_fraction = 0.25;
};

struct RefinedSegment {
  std::size_t detected_start = 0, detected_end = 0;
  std::size_t start = 0, end = 0;  ///< [k~_j, k~'_j)
  bool usable = false;
  std::string reason;

  std::size_t length() const { return end > start ? end - start : 0; }
};

struct RefinedSegments {
  double v_n = 0.0;
  std::size_t margin = 0;  ///< ceil(N / v_N) before capping
  double spread = 0.0;
  std::vector<RefinedSegment> segments;
  std::vector<Warning> warnings;
};

/// k~_j = k^_j + ceil(N/v_N), k~'_j = k^_{j+1} - ceil(N/v_N), on every segment
/// including the outer ends. Segments left with fewer than two blocks at the
/// coarsest scale are flagged unusable.
inline RefinedSegments refine_segments(const ChangePointResult& result, double v_n, std::size_t coarsest_scale,
                                       const RefineOptions& opt = {}) {
  if (!(v_n >= 1.0)) throw Error(ErrorCode::invalid_spec, "rate v_N must be at least 1 (got " + std::to_string(v_n) + ")");
  RefinedSegments out;
  out.v_n = v_n;
  out.margin = static_cast<std::size_t>(std::ceil(static_cast<double>(result.n) / v_n - 1e-9));
  const auto b = result.bounds();
  bool any_usable = false, capped = false;
  for (std::size_t j = 0; j + 1 < b.size(); ++j) {
    RefinedSegment s;
    s.detected_start = b[j];
    s.detected_end = b[j + 1];
    const std::size_t len = s.detected_end - s.detected_start;
    const auto cap = static_cast<std::size_t>(std::floor(opt.margin_cap_fraction * static_cast<double>(len)));
    const std::size_t trim = std::min(out.margin, cap);
    capped = capped || trim < out.margin;
    s.start = s.detected_start + trim;
    s.end = s.detected_end >= trim ? s.detected_end - trim : 0;
    if (s.end <= s.start) {
      s.reason = "trimmed segment is empty";
    } else if (s.end / coarsest_scale < s.start / coarsest_scale + 2) {
      s.reason = "trimmed segment holds fewer than two blocks at the coarsest scale";
    } else {
      s.usable = true;
    }
    any_usable = any_usable || s.usable;
    out.segments.push_back(std::move(s));
  }
  if (capped)
    out.warnings.push_back(Warning{"margin_capped", "trim ceil(N/v_N)=" + std::to_string(out.margin) +
                                                        " capped at a fraction of the segment length"});
  if (!any_usable) throw Error(ErrorCode::unusable_segments, "every refined segment is unusable");
  return out;
}

/// Regime form: v_N from (kappa, spread).
inline RefinedSegments refine_segments(const ChangePointResult& result, Regime regime, double kappa, double spread,
                                       std::size_t coarsest_scale, const RefineOptions& opt = {}) {
  double v = rate_v(regime, result.n, kappa, spread);
  std::optional<Warning> clamped;
  if (v < 1.0) {
    clamped = Warning{"rate_clamped", "v_N=" + std::to_string(v) + " below 1; using v_N = 1"};
    v = 1.0;
  }
  auto r = refine_segments(result, v, coarsest_scale, opt);
  r.spread = spread;
  if (clamped) r.warnings.push_back(*clamped);
  return r;
}

struct GoodnessOfFit {
  double t = 0.0;
  double p_value = 1.0;
};

/// T = (n_j / a_N) (Y - L theta)' Gamma^{-1} (Y - L theta), referred to chi^2(l - 2).
inline GoodnessOfFit goodness_test(std::span<const double> y, const RegressionDesign& design, const LineFit& theta,
                                   const Eigen::MatrixXd& gamma, std::size_t n_j, double a_n) {
  const std::size_t l = design.size();
  if (l < 3) throw Error(ErrorCode::invalid_spec, "goodness-of-fit needs at least three scales");
  if (condition_number(gamma) >= max_gamma_condition)
    throw Error(ErrorCode::singular_design, "Gamma too ill-conditioned for the goodness-of-fit statistic");
  const Eigen::VectorXd resid =
      as_vector(y) - (theta.alpha * design.log_scales.array() + theta.log_beta).matrix();
  const Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  GoodnessOfFit g;
  g.t = std::max(0.0, static_cast<double>(n_j) / a_n * resid.dot(llt.solve(resid)));
  const boost::math::chi_squared chi(static_cast<double>(l - 2));
  g.p_value = g.t <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(chi, g.t));
  return g;
}

/// Regime parameter from a slope: D = alpha (LRD) or H = (alpha - 1)/2 (FBM).
inline double domain_parameter(Regime regime, double alpha) {
  return regime == Regime::lrd ? alpha : 0.5 * (alpha - 1.0);
}

struct ParameterEstimate {
  double alpha = 0.0;
  double log_beta = 0.0;       ///< intercept against log(r_i a_N)
  double intercept_l1 = 0.0;   ///< intercept against log(r_i)
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  ///< finite-sample: (a_N/n_j) x asymptotic
  double ci_low = 0.0, ci_high = 0.0;          ///< 95% for alpha
  double parameter = 0.0;                      ///< D or H
  double parameter_ci_low = 0.0, parameter_ci_high = 0.0;
};

struct SegmentEstimate {
  std::size_t index = 0;
  RefinedSegment segment;
  bool ok = false;
  std::string reason;
  std::vector<double> y;
  ParameterEstimate ols;
  ParameterEstimate fgls;
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();  ///< asymptotic OLS covariance at alpha~
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();      ///< asymptotic FGLS covariance at alpha~
  double sigma_minus_m_min_eigenvalue = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  std::vector<Warning> warnings;
};

namespace detail {

inline ParameterEstimate make_estimate(const LineFit& f, const Eigen::Matrix2d& asym, double a_over_n, Regime regime) {
  ParameterEstimate e;
  e.alpha = f.alpha;
  e.log_beta = f.log_beta;
  e.intercept_l1 = f.intercept_l1;
  e.covariance = a_over_n * asym;
  const double half = ci_z * std::sqrt(std::max(0.0, e.covariance(0, 0)));
  e.ci_low = f.alpha - half;
  e.ci_high = f.alpha + half;
  e.parameter = domain_parameter(regime, f.alpha);
  e.parameter_ci_low = domain_parameter(regime, e.ci_low);
  e.parameter_ci_high = domain_parameter(regime, e.ci_high);
  return e;
}

}  // namespace detail

/// OLS and FGLS per usable refined segment, with Gamma plugged in at the OLS slope.
inline std::vector<SegmentEstimate> estimate_segments(const CoefficientCache& cache, const RefinedSegments& refined,
                                                      const RegressionDesign& design, Regime regime,
                                                      double base_scale, GammaTable& gamma) {
  std::vector<SegmentEstimate> out;
  for (std::size_t j = 0; j < refined.segments.size(); ++j) {
    SegmentEstimate est;
    est.index = j;
    est.segment = refined.segments[j];
    if (!est.segment.usable) {
      est.reason = est.segment.reason;
      out.push_back(std::move(est));
      continue;
    }
    try {
      est.y = cache.log_variance_vector(est.segment.start, est.segment.end);
      const double a_over_n = base_scale / static_cast<double>(est.segment.length());
      const LineFit ols = ols_fit(est.y, design);
      const Eigen::MatrixXd g = gamma.at(ols.alpha, &est.warnings);
      est.sigma = ols_covariance(design, g);
      const GlsFit gls = fgls_fit(est.y, design, g);
      if (gls.warning) est.warnings.push_back(*gls.warning);
      est.m = gls.m;
      est.ols = detail::make_estimate(ols, est.sigma, a_over_n, regime);
      est.fgls = detail::make_estimate(gls.line, est.m, a_over_n, regime);
      const Eigen::Matrix2d diff = est.sigma - est.m;
      est.sigma_minus_m_min_eigenvalue =
          Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(0.5 * (diff + diff.transpose())).eigenvalues().minCoeff();
      if (!gls.fell_back) {
        const auto gof = goodness_test(est.y, design, gls.line, g, est.segment.length(), base_scale);
        est.t_stat = gof.t;
        est.p_value = gof.p_value;
      } else {
        est.t_stat = std::numeric_limits<double>::quiet_NaN();
        est.p_value = std::numeric_limits<double>::quiet_NaN();
      }
      est.ok = true;
    } catch (const Error& e) {
      est.ok = false;
      est.reason = std::string(to_string(e.code())) + ": " + e.what();
    }
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace lrdbreak
