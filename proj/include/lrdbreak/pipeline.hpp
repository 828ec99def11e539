#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lrdbreak/error.hpp"
#include "lrdbreak/gamma.hpp"
#include "lrdbreak/inference.hpp"
#include "lrdbreak/regression.hpp"
#include "lrdbreak/segmentation.hpp"
#include "lrdbreak/synth.hpp"
#include "lrdbreak/wavelets.hpp"
#include "lrdbreak/wvar.hpp"

namespace lrdbreak {

inline constexpr double default_kappa_lrd = 0.05;
inline constexpr double default_kappa_fbm = 0.02;

/// Everything `analyze` needs besides the series.
struct AnalysisConfig {
  Regime regime = Regime::lrd;
  std::size_t m = 0;
  std::optional<double> kappa;          ///< defaults per regime
  std::optional<double> base_scale;     ///< overrides the kappa rule
  std::vector<double> multipliers = ScaleGrid::default_multipliers();
  std::string wavelet = "poly4";
  std::optional<std::size_t> min_seg;
  std::optional<std::size_t> grid_step;
  RefineOptions refine;
  MomentCorrection correction = MomentCorrection::zero_mean;
  GammaMethod gamma_method = GammaMethod::monte_carlo;
  std::size_t gamma_replicates = 500;
  std::size_t gamma_n_ref = 0;
  std::uint64_t gamma_seed = 20070101;

  double resolved_kappa() const {
    return kappa.value_or(regime == Regime::lrd ? default_kappa_lrd : default_kappa_fbm);
  }

  ScaleGrid grid(std::size_t n) const {
    if (base_scale) {
      auto g = ScaleGrid::with_base(regime, *base_scale, multipliers);
      g.kappa = kappa.value_or(std::numeric_limits<double>::quiet_NaN());
      return g;
    }
    return ScaleGrid::from_rule(regime, n, resolved_kappa(), multipliers);
  }

  GammaKey gamma_key(const ScaleGrid& g) const {
    GammaKey k;
    k.regime = regime;
    k.method = gamma_method;
    k.wavelet = wavelet;
    k.scales = g.scales;
    k.base_scale = g.base_scale;
    k.replicates = gamma_replicates;
    k.n_ref = gamma_n_ref;
    k.seed = gamma_seed;
    k.correction = correction;
    return k;
  }
};

struct Analysis {
  ScaleGrid grid;
  ChangePointResult detection;
  RefinedSegments refined;
  std::vector<SegmentEstimate> estimates;
  std::vector<Warning> warnings;
};

/// Detection only: coefficient cache, search space and the exact contrast minimizer.
inline ChangePointResult detect(const TimeSeries& ts, const AnalysisConfig& cfg, ScaleGrid* grid_out = nullptr) {
  ts.validate();
  const std::size_t n = ts.last_index();
  const ScaleGrid grid = cfg.grid(n);
  const WaveletSpec w = find_wavelet(cfg.wavelet);
  if (!w.supports(cfg.regime))
    throw Error(ErrorCode::unknown_wavelet, "wavelet '" + cfg.wavelet + "' does not meet the regime's conditions");
  const CoefficientCache cache(ts, grid, w, cfg.correction);
  const auto space = SearchSpace::make(n, cfg.m, grid, cfg.min_seg, cfg.grid_step);
  const auto design = RegressionDesign::from_grid(grid);
  if (grid_out) *grid_out = grid;
  return detect_changes(cache, space, design);
}

/// Full pipeline: detect, trim, estimate. `gamma` must have been built for
/// cfg.gamma_key(cfg.grid(N)).
inline Analysis analyze(const TimeSeries& ts, const AnalysisConfig& cfg, GammaTable& gamma) {
  ts.validate();
  const std::size_t n = ts.last_index();
  Analysis a;
  a.grid = cfg.grid(n);
  if (!(gamma.key() == cfg.gamma_key(a.grid)))
    throw Error(ErrorCode::table_mismatch, "Gamma table was built for a different configuration");
  const WaveletSpec w = find_wavelet(cfg.wavelet);
  if (!w.supports(cfg.regime))
    throw Error(ErrorCode::unknown_wavelet, "wavelet '" + cfg.wavelet + "' does not meet the regime's conditions");

  const CoefficientCache cache(ts, a.grid, w, cfg.correction);
  const auto space = SearchSpace::make(n, cfg.m, a.grid, cfg.min_seg, cfg.grid_step);
  const auto design = RegressionDesign::from_grid(a.grid);
  a.detection = detect_changes(cache, space, design);
  a.warnings = a.detection.warnings;

  const double kappa = std::isnan(a.grid.kappa) ? implied_kappa(cfg.regime, n, static_cast<double>(a.grid.base_scale))
                                                : a.grid.kappa;
  const double spread = exponent_spread(a.detection, cfg.regime, &a.warnings);
  a.refined = refine_segments(a.detection, cfg.regime, kappa, spread, a.grid.coarsest(), cfg.refine);
  a.warnings.insert(a.warnings.end(), a.refined.warnings.begin(), a.refined.warnings.end());

  a.estimates = estimate_segments(cache, a.refined, design, cfg.regime, static_cast<double>(a.grid.base_scale), gamma);
  for (const auto& e : a.estimates) {
    for (const auto& wv : e.warnings)
      a.warnings.push_back(Warning{wv.code, "segment " + std::to_string(e.index) + ": " + wv.message});
    if (!e.ok)
      a.warnings.push_back(Warning{"segment_unusable", "segment " + std::to_string(e.index) + ": " + e.reason});
  }
  return a;
}

}  // namespace lrdbreak
