#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "lrdbreak/error.hpp"
#include "lrdbreak/wvar.hpp"

namespace lrdbreak {

/// Rows (log(r_i a_N), 1) for the contrast, and rows (log r_i, 1) for the
/// normalized design used by the asymptotic covariances.
struct RegressionDesign {
  Eigen::VectorXd log_scales;
  double log_base = 0.0;

  static RegressionDesign from_grid(const ScaleGrid& grid) {
    const auto x = grid.log_scales();
    return from_abscissae(x, std::log(static_cast<double>(grid.base_scale)));
  }

  static RegressionDesign from_abscissae(std::span<const double> x, double log_base = 0.0) {
    if (x.size() < 3) throw Error(ErrorCode::invalid_spec, "regression needs at least three scales");
    RegressionDesign d;
    d.log_scales = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    d.log_base = log_base;
    const double mean = d.log_scales.mean();
    if ((d.log_scales.array() - mean).square().sum() <= 1e-14)
      throw Error(ErrorCode::singular_design, "regression abscissae are not distinct");
    return d;
  }

  std::size_t size() const { return static_cast<std::size_t>(log_scales.size()); }

  Eigen::MatrixXd full() const {
    Eigen::MatrixXd l(log_scales.size(), 2);
    l.col(0) = log_scales;
    l.col(1).setOnes();
    return l;
  }

  Eigen::MatrixXd normalized() const {
    Eigen::MatrixXd l = full();
    l.col(0).array() -= log_base;
    return l;
  }
};

struct LineFit {
  double alpha = 0.0;
  double log_beta = 0.0;      ///< intercept against log(r_i a_N)
  double intercept_l1 = 0.0;  ///< intercept against log(r_i); equals log_beta + alpha log a_N
  double rss = 0.0;           ///< residual sum of squares (Gamma-weighted for GLS)
};

inline Eigen::VectorXd as_vector(std::span<const double> y) {
  return Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

/// Ordinary least squares of Y on log(r_i a_N).
inline LineFit ols_fit(std::span<const double> y, const RegressionDesign& design) {
  if (y.size() != design.size()) throw Error(ErrorCode::invalid_spec, "Y length differs from the design");
  const Eigen::VectorXd yy = as_vector(y);
  const Eigen::VectorXd& x = design.log_scales;
  const double xm = x.mean(), ym = yy.mean();
  const Eigen::ArrayXd dx = x.array() - xm;
  const double sxx = dx.square().sum();
  if (sxx <= 1e-14) throw Error(ErrorCode::singular_design, "regression abscissae are not distinct");
  LineFit f;
  f.alpha = (dx * (yy.array() - ym)).sum() / sxx;
  f.log_beta = ym - f.alpha * xm;
  f.intercept_l1 = f.log_beta + f.alpha * design.log_base;
  f.rss = (yy.array() - f.alpha * x.array() - f.log_beta).square().sum();
  return f;
}

/// Sigma = (L1'L1)^{-1} L1' Gamma L1 (L1'L1)^{-1}: asymptotic covariance of the OLS pair.
inline Eigen::Matrix2d ols_covariance(const RegressionDesign& design, const Eigen::MatrixXd& gamma) {
  const Eigen::MatrixXd l1 = design.normalized();
  const Eigen::Matrix2d inv = (l1.transpose() * l1).inverse();
  return inv * l1.transpose() * gamma * l1 * inv;
}

inline constexpr double max_gamma_condition = 1e8;

struct GlsFit {
  LineFit line;
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();  ///< (L1' Gamma^{-1} L1)^{-1}
  bool fell_back = false;
  std::optional<Warning> warning;
};

inline double condition_number(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
  return ev.maxCoeff() / ev.minCoeff();
}

/// Generalized least squares with weight Gamma^{-1}. An ill-conditioned Gamma
/// degrades to OLS, with M replaced by the OLS covariance Sigma.
inline GlsFit fgls_fit(std::span<const double> y, const RegressionDesign& design, const Eigen::MatrixXd& gamma) {
  const auto l = static_cast<Eigen::Index>(design.size());
  if (gamma.rows() != l || gamma.cols() != l)
    throw Error(ErrorCode::invalid_spec, "Gamma dimension differs from the design");
  GlsFit out;
  const double cond = condition_number(gamma);
  if (!(cond < max_gamma_condition)) {
    out.line = ols_fit(y, design);
    out.m = ols_covariance(design, gamma);
    out.fell_back = true;
    out.warning = Warning{"ill_conditioned_gamma", "Gamma condition number " + std::to_string(cond) +
                                                       " too large; FGLS replaced by OLS"};
    return out;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  const Eigen::VectorXd yy = as_vector(y);
  const Eigen::MatrixXd lf = design.full();
  const Eigen::MatrixXd wl = llt.solve(lf);
  const Eigen::Matrix2d normal = lf.transpose() * wl;
  const Eigen::Vector2d theta = normal.ldlt().solve(wl.transpose() * yy);
  const Eigen::VectorXd resid = yy - lf * theta;

  out.line.alpha = theta[0];
  out.line.log_beta = theta[1];
  out.line.intercept_l1 = theta[1] + theta[0] * design.log_base;
  out.line.rss = resid.dot(llt.solve(resid));

  const Eigen::MatrixXd l1 = design.normalized();
  out.m = (l1.transpose() * llt.solve(l1)).inverse();
  return out;
}

}  // namespace lrdbreak
