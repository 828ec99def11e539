#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lrdbreak/error.hpp"

namespace lrdbreak {

enum class Regime { lrd, fbm };

constexpr std::string_view to_string(Regime r) { return r == Regime::lrd ? "lrd" : "fbm"; }

inline Regime parse_regime(std::string_view s) {
  if (s == "lrd") return Regime::lrd;
  if (s == "fbm") return Regime::fbm;
  throw Error(ErrorCode::invalid_spec, "unknown regime '" + std::string(s) + "' (expected lrd or fbm)");
}

/// A [0,1]-supported mother wavelet given in closed form.
struct WaveletSpec {
  std::string name;
  std::function<double(double)> evaluate;  ///< zero outside [0,1]
  int vanishing_moments = 0;               ///< highest p with a vanishing p-th moment
  bool valid_lrd = false;                  ///< also satisfies psi(0) = psi(1) = 0
  bool valid_fbm = false;

  double operator()(double t) const { return evaluate(t); }
  bool supports(Regime r) const { return r == Regime::lrd ? valid_lrd : valid_fbm; }
};

/// t(1-t)((t-1/2)^2 - 1/20) on [0,1]. The constant 1/20 is what makes the first
/// moment vanish; the zeroth vanishes by symmetry.
inline double psi_poly4(double t) {
  if (t < 0.0 || t > 1.0) return 0.0;
  const double c = t - 0.5;
  return t * (1.0 - t) * (c * c - 0.05);
}

inline WaveletSpec poly4_wavelet() {
  return WaveletSpec{"poly4", psi_poly4, 1, true, true};
}

inline std::vector<std::string> wavelet_names() { return {"poly4"}; }

inline WaveletSpec find_wavelet(std::string_view name) {
  if (name == "poly4") return poly4_wavelet();
  throw Error(ErrorCode::unknown_wavelet, "unknown wavelet '" + std::string(name) + "'");
}

struct MomentReport {
  std::vector<double> moments;  ///< moments[p] = int_0^1 t^p psi(t) dt
  std::vector<int> violations;  ///< orders p <= vanishing_moments whose moment exceeds tol
};

/// Moments p = 0..p_max by adaptive Gauss-Kronrod quadrature. Orders above the
/// wavelet's declared vanishing moments are reported but never flagged.
inline MomentReport check_moments(const WaveletSpec& w, int p_max, double tol) {
  if (p_max < 0) throw Error(ErrorCode::domain_error, "p_max must be non-negative");
  MomentReport rep;
  for (int p = 0; p <= p_max; ++p) {
    auto f = [&](double t) { return std::pow(t, p) * w(t); };
    double err = 0.0;
    const double m = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14, &err);
    rep.moments.push_back(m);
    if (p <= w.vanishing_moments && std::abs(m) > tol) rep.violations.push_back(p);
  }
  return rep;
}

/// Riemann-sum moment (1/a) sum_{j=0}^{a} (j/a)^p psi(j/a): what the discrete
/// coefficient actually sees at integer scale a.
inline double discrete_moment(const WaveletSpec& w, int p, std::size_t a) {
  double s = 0.0;
  const double inv = 1.0 / static_cast<double>(a);
  for (std::size_t j = 0; j <= a; ++j) {
    const double t = static_cast<double>(j) * inv;
    s += std::pow(t, p) * w(t);
  }
  return s * inv;
}

}  // namespace lrdbreak
