#pragma once

// Least-squares contrast over m breakpoints. For fixed breakpoints the per-segment
// (alpha, log beta) minimizers are plain OLS fits, so the contrast is segment
// additive and the breakpoint search is an exact dynamic program.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lrdbreak/error.hpp"
#include "lrdbreak/regression.hpp"
#include "lrdbreak/wvar.hpp"

namespace lrdbreak {

/// Admissible breakpoint configurations: strictly increasing picks from a grid of
/// candidates such that every segment (including the two outer ones) is at least
/// min_seg long.
struct SearchSpace {
  std::size_t n = 0;  ///< N
  std::size_t m = 0;
  std::size_t grid_step = 1;
  std::size_t min_seg = 2;
  std::vector<std::size_t> candidates;

  /// Default grid step ceil(r_l a_N) and min_seg = max(2 ceil(r_l a_N) l, ceil(0.05 N)).
  static SearchSpace make(std::size_t n, std::size_t m, const ScaleGrid& grid,
                          std::optional<std::size_t> min_seg_override = std::nullopt,
                          std::optional<std::size_t> grid_step_override = std::nullopt) {
    const std::size_t coarsest = grid.coarsest();
    const std::size_t floor_seg = 2 * coarsest;
    std::size_t min_seg = std::max(floor_seg * grid.size(),
                                   static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n))));
    if (min_seg_override) {
      if (*min_seg_override < floor_seg)
        throw Error(ErrorCode::infeasible_search_space,
                    "min_seg must be at least twice the coarsest scale (" + std::to_string(floor_seg) + ")");
      min_seg = *min_seg_override;
    }
    const std::size_t step = grid_step_override.value_or(coarsest);
    if (step == 0) throw Error(ErrorCode::invalid_spec, "grid step must be positive");
    std::vector<std::size_t> cands;
    if (n >= 2 * min_seg)
      for (std::size_t k = step * ((min_seg + step - 1) / step); k + min_seg <= n; k += step) cands.push_back(k);
    return from_candidates(n, m, min_seg, std::move(cands), step);
  }

  static SearchSpace from_candidates(std::size_t n, std::size_t m, std::size_t min_seg,
                                     std::vector<std::size_t> candidates, std::size_t grid_step = 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (candidates[i] == 0 || candidates[i] >= n)
        throw Error(ErrorCode::invalid_spec, "candidates must lie strictly inside (0, N)");
      if (i > 0 && candidates[i] <= candidates[i - 1])
        throw Error(ErrorCode::invalid_spec, "candidates must be strictly increasing");
    }
    if (min_seg == 0) throw Error(ErrorCode::invalid_spec, "min_seg must be positive");
    return SearchSpace{n, m, grid_step, min_seg, std::move(candidates)};
  }

  bool admissible(std::size_t k, std::size_t k2) const { return k2 >= k + min_seg; }
};

/// Memoized per-segment residual sum of squares. Degenerate segments cost +inf and
/// leave a warning behind.
class SegmentCost {
 public:
  SegmentCost(const CoefficientCache& cache, const RegressionDesign& design) : cache_(cache), design_(design) {}

  double operator()(std::size_t k, std::size_t k2) {
    const std::uint64_t key = (static_cast<std::uint64_t>(k) << 32) | static_cast<std::uint64_t>(k2);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double c;
    try {
      const auto y = cache_.log_variance_vector(k, k2);
      c = ols_fit(y, design_).rss;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_segment && e.code() != ErrorCode::too_few_blocks) throw;
      c = std::numeric_limits<double>::infinity();
      warnings_.push_back(Warning{std::string(to_string(e.code())), e.what()});
    }
    memo_.emplace(key, c);
    return c;
  }

  const std::vector<Warning>& warnings() const { return warnings_; }
  std::size_t evaluations() const { return memo_.size(); }

 private:
  const CoefficientCache& cache_;
  const RegressionDesign& design_;
  std::unordered_map<std::uint64_t, double> memo_;
  std::vector<Warning> warnings_;
};

/// Convenience one-shot form of SegmentCost.
inline double segment_cost(const CoefficientCache& cache, const RegressionDesign& design, std::size_t k,
                           std::size_t k2) {
  return ols_fit(cache.log_variance_vector(k, k2), design).rss;
}

struct Breakpoints {
  std::vector<std::size_t> k;
  double value = 0.0;  ///< sum of segment costs, accumulated left to right
};

/// Exact minimizer of sum_j cost(k_j, k_{j+1}) over the search space. Among
/// optimal configurations the lexicographically smallest one is returned.
template <class CostFn>
Breakpoints minimize_contrast(const SearchSpace& space, CostFn&& cost) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pos{0};
  pos.insert(pos.end(), space.candidates.begin(), space.candidates.end());
  const std::size_t c = pos.size();  // positions 0..c-1, N handled separately
  const std::size_t n = space.n;

  // value[t][i]: best cost from pos[i] to N with exactly t more breakpoints.
  std::vector<std::vector<double>> value(space.m + 1, std::vector<double>(c, inf));
  for (std::size_t i = 0; i < c; ++i)
    if (space.admissible(pos[i], n)) value[0][i] = cost(pos[i], n);
  for (std::size_t t = 1; t <= space.m; ++t) {
    const std::size_t lo = (t == space.m) ? 0 : 1;
    const std::size_t hi = (t == space.m) ? 1 : c;
    for (std::size_t i = lo; i < hi; ++i) {
      double best = inf;
      for (std::size_t j = i + 1; j < c; ++j) {
        if (!space.admissible(pos[i], pos[j]) || value[t - 1][j] == inf) continue;
        best = std::min(best, cost(pos[i], pos[j]) + value[t - 1][j]);
      }
      value[t][i] = best;
    }
  }
  if (value[space.m][0] == inf)
    throw Error(ErrorCode::infeasible_search_space,
                "no admissible configuration of " + std::to_string(space.m) + " breakpoints (N=" +
                    std::to_string(n) + ", min_seg=" + std::to_string(space.min_seg) + ", " +
                    std::to_string(space.candidates.size()) + " candidates)");

  Breakpoints out;
  std::size_t i = 0;
  for (std::size_t t = space.m; t >= 1; --t) {
    for (std::size_t j = i + 1; j < c; ++j) {
      if (!space.admissible(pos[i], pos[j]) || value[t - 1][j] == inf) continue;
      if (cost(pos[i], pos[j]) + value[t - 1][j] == value[t][i]) {
        out.k.push_back(pos[j]);
        i = j;
        break;
      }
    }
  }
  std::size_t prev = 0;
  for (auto k : out.k) {
    out.value += cost(prev, k);
    prev = k;
  }
  out.value += cost(prev, n);
  return out;
}

struct SegmentFit {
  std::size_t start = 0;
  std::size_t end = 0;  ///< exclusive
  std::vector<double> y;
  LineFit ols;
};

struct ChangePointResult {
  std::size_t n = 0;
  std::vector<std::size_t> k_hat;
  std::vector<double> tau_hat;
  std::vector<SegmentFit> segments;
  double contrast_value = 0.0;
  std::size_t grid_step = 0;
  std::size_t min_seg = 0;
  std::size_t candidate_count = 0;
  std::vector<Warning> warnings;

  /// Segment bounds 0 = k_0 < k_1 < ... < k_m < k_{m+1} = N.
  std::vector<std::size_t> bounds() const {
    std::vector<std::size_t> b{0};
    b.insert(b.end(), k_hat.begin(), k_hat.end());
    b.push_back(n);
    return b;
  }
};

inline ChangePointResult detect_changes(const CoefficientCache& cache, const SearchSpace& space,
                                        const RegressionDesign& design) {
  if (space.n != cache.last_index()) throw Error(ErrorCode::invalid_spec, "search space and cache disagree on N");
  SegmentCost cost(cache, design);
  Breakpoints bp;
  try {
    bp = minimize_contrast(space, cost);
  } catch (const Error& e) {
    // Infeasible only because every segment was degenerate: report the data problem.
    if (e.code() == ErrorCode::infeasible_search_space)
      for (const auto& w : cost.warnings())
        if (w.code == to_string(ErrorCode::degenerate_segment))
          throw Error(ErrorCode::degenerate_segment, "no admissible configuration with positive wavelet variances: " +
                                                         w.message);
    throw;
  }

  ChangePointResult r;
  r.n = space.n;
  r.k_hat = bp.k;
  for (auto k : bp.k) r.tau_hat.push_back(static_cast<double>(k) / static_cast<double>(space.n));
  r.grid_step = space.grid_step;
  r.min_seg = space.min_seg;
  r.candidate_count = space.candidates.size();
  const auto b = r.bounds();
  for (std::size_t j = 0; j + 1 < b.size(); ++j) {
    SegmentFit s{b[j], b[j + 1], cache.log_variance_vector(b[j], b[j + 1]), {}};
    s.ols = ols_fit(s.y, design);
    r.contrast_value += s.ols.rss;
    r.segments.push_back(std::move(s));
  }
  r.warnings = cost.warnings();
  return r;
}

}  // namespace lrdbreak
