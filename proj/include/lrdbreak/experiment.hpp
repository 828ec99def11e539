#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lrdbreak/error.hpp"
#include "lrdbreak/pipeline.hpp"
#include "lrdbreak/rng.hpp"
#include "lrdbreak/synth.hpp"

namespace lrdbreak {

/// A data-generating setting with known truth.
struct Scenario {
  std::string id;
  Regime regime = Regime::lrd;
  PiecewiseSpec spec;  ///< seed is overwritten per replicate
  std::vector<std::string> names;
  std::vector<double> truth;
};

/// Exponent of segment j on the contrast's scale: D for stationary segments, H for FBM.
inline double segment_truth(const SegmentSpec& s) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FbmSpec>) return v.hurst;
        else return v.long_memory_exponent();
      },
      s);
}

inline Scenario make_custom_scenario(std::string id, Regime regime, PiecewiseSpec spec) {
  spec.validate();
  Scenario sc{std::move(id), regime, std::move(spec), {}, {}};
  const char* sym = regime == Regime::lrd ? "D" : "H";
  for (std::size_t j = 0; j < sc.spec.change_fractions.size(); ++j) {
    sc.names.push_back("tau_" + std::to_string(j + 1));
    sc.truth.push_back(sc.spec.change_fractions[j]);
  }
  for (std::size_t j = 0; j < sc.spec.segments.size(); ++j) {
    sc.names.push_back(std::string(sym) + "_" + std::to_string(j));
    sc.truth.push_back(segment_truth(sc.spec.segments[j]));
  }
  return sc;
}

inline std::vector<std::string> scenario_ids() { return {"farima-1cp", "fbm-2cp"}; }

/// farima-1cp: N = 20000, one change at 0.75, FARIMA d = 0.1 then 0.4 (D = 0.2, 0.8).
/// fbm-2cp: N = 10000 (or 5000), changes at 0.3 and 0.78, FBM H = 0.6, 0.8, 0.5.
inline Scenario make_scenario(const std::string& id, std::optional<std::size_t> n = std::nullopt) {
  if (id == "farima-1cp") {
    PiecewiseSpec s;
    s.n_samples = n.value_or(20000);
    s.change_fractions = {0.75};
    s.segments = {StationarySpec::farima(0.1), StationarySpec::farima(0.4)};
    return make_custom_scenario(id, Regime::lrd, s);
  }
  if (id == "fbm-2cp") {
    PiecewiseSpec s;
    s.n_samples = n.value_or(10000);
    s.change_fractions = {0.3, 0.78};
    s.segments = {FbmSpec{0.6, 1.0}, FbmSpec{0.8, 1.0}, FbmSpec{0.5, 1.0}};
    return make_custom_scenario(id, Regime::fbm, s);
  }
  throw Error(ErrorCode::unknown_scenario, "unknown scenario '" + id + "'");
}

struct ReplicateOutcome {
  bool ok = false;
  std::string error;
  std::vector<double> tau;   ///< estimated change fractions
  std::vector<double> ols;   ///< per-segment D~ or H~ (NaN when unusable)
  std::vector<double> fgls;  ///< per-segment D-bar or H-bar
  std::vector<double> t_stat;
};

struct ColumnSummary {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double sd = 0.0;    ///< empirical standard deviation (n - 1)
  double rmse = 0.0;  ///< sqrt(mean((x - truth)^2))
  std::size_t count = 0;
};

struct ExperimentResult {
  Scenario scenario;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<ReplicateOutcome> outcomes;
  std::size_t failures = 0;
  std::map<std::string, std::size_t> failure_reasons;
  std::vector<ColumnSummary> columns;  ///< tau_j, then OLS estimates, then FGLS estimates
};

inline ColumnSummary summarize(std::string name, double truth, const std::vector<double>& xs) {
  ColumnSummary c{std::move(name), truth, 0.0, 0.0, 0.0, 0};
  double sum = 0.0, sq = 0.0;
  for (double x : xs) {
    if (!std::isfinite(x)) continue;
    ++c.count;
    sum += x;
    sq += (x - truth) * (x - truth);
  }
  if (c.count == 0) {
    c.mean = c.sd = c.rmse = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  c.mean = sum / static_cast<double>(c.count);
  double v = 0.0;
  for (double x : xs)
    if (std::isfinite(x)) v += (x - c.mean) * (x - c.mean);
  c.sd = c.count > 1 ? std::sqrt(v / static_cast<double>(c.count - 1)) : 0.0;
  c.rmse = std::sqrt(sq / static_cast<double>(c.count));
  return c;
}

/// One replicate: simulate with the replicate seed, then run the full pipeline.
inline ReplicateOutcome run_replicate(const Scenario& sc, const AnalysisConfig& cfg, GammaTable& gamma,
                                      std::uint64_t seed) {
  ReplicateOutcome out;
  const std::size_t segs = sc.spec.segments.size();
  out.ols.assign(segs, std::numeric_limits<double>::quiet_NaN());
  out.fgls = out.ols;
  out.t_stat = out.ols;
  try {
    PiecewiseSpec spec = sc.spec;
    spec.seed = seed;
    const auto ts = gen_piecewise(spec);
    const auto a = analyze(ts, cfg, gamma);
    out.tau = a.detection.tau_hat;
    for (const auto& e : a.estimates) {
      if (!e.ok || e.index >= segs) continue;
      out.ols[e.index] = e.ols.parameter;
      out.fgls[e.index] = e.fgls.parameter;
      out.t_stat[e.index] = e.t_stat;
    }
    out.ok = true;
  } catch (const Error& e) {
    out.error = std::string(to_string(e.code()));
  }
  return out;
}

/// Runs `replicates` independent replicates, seeds derived from `seed`, sharing
/// `gamma`. Replicates are spread over `threads` workers; results do not depend
/// on the thread count.
inline ExperimentResult run_experiment(const Scenario& sc, AnalysisConfig cfg, GammaTable& gamma,
                                       std::size_t replicates, std::uint64_t seed, unsigned threads = 1) {
  if (replicates < 1) throw Error(ErrorCode::invalid_spec, "need at least one replicate");
  cfg.regime = sc.regime;
  cfg.m = sc.spec.change_fractions.size();
  if (!(gamma.key() == cfg.gamma_key(cfg.grid(sc.spec.n_samples))))
    throw Error(ErrorCode::table_mismatch, "Gamma table was built for a different configuration");

  ExperimentResult res;
  res.scenario = sc;
  res.replicates = replicates;
  res.seed = seed;
  res.outcomes.resize(replicates);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < replicates; i = next++)
      res.outcomes[i] = run_replicate(sc, cfg, gamma, derive_seed(seed, i));
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  const std::size_t m = sc.spec.change_fractions.size();
  const std::size_t segs = sc.spec.segments.size();
  std::vector<std::vector<double>> cols(m + 2 * segs);
  for (const auto& o : res.outcomes) {
    if (!o.ok) {
      ++res.failures;
      ++res.failure_reasons[o.error];
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) cols[j].push_back(o.tau[j]);
    for (std::size_t j = 0; j < segs; ++j) {
      cols[m + j].push_back(o.ols[j]);
      cols[m + segs + j].push_back(o.fgls[j]);
    }
  }
  for (std::size_t j = 0; j < m; ++j) res.columns.push_back(summarize(sc.names[j], sc.truth[j], cols[j]));
  for (std::size_t j = 0; j < segs; ++j)
    res.columns.push_back(summarize(sc.names[m + j] + "_ols", sc.truth[m + j], cols[m + j]));
  for (std::size_t j = 0; j < segs; ++j)
    res.columns.push_back(summarize(sc.names[m + j] + "_fgls", sc.truth[m + j], cols[m + segs + j]));
  return res;
}

/// Same, with a fresh in-memory Gamma table.
inline ExperimentResult run_experiment(const Scenario& sc, AnalysisConfig cfg, std::size_t replicates,
                                       std::uint64_t seed, unsigned threads = 1) {
  cfg.regime = sc.regime;
  cfg.m = sc.spec.change_fractions.size();
  GammaTable gamma(cfg.gamma_key(cfg.grid(sc.spec.n_samples)));
  return run_experiment(sc, cfg, gamma, replicates, seed, threads);
}

/// Rows mean / sd / rmse / truth / count, one column per estimated quantity.
inline void write_summary_csv(std::ostream& os, const ExperimentResult& r) {
  os << "statistic";
  for (const auto& c : r.columns) os << ',' << c.name;
  os << '\n' << std::setprecision(10);
  auto row = [&](const char* label, auto get) {
    os << label;
    for (const auto& c : r.columns) os << ',' << get(c);
    os << '\n';
  };
  row("mean", [](const ColumnSummary& c) { return c.mean; });
  row("sd", [](const ColumnSummary& c) { return c.sd; });
  row("rmse", [](const ColumnSummary& c) { return c.rmse; });
  row("truth", [](const ColumnSummary& c) { return c.truth; });
  row("count", [](const ColumnSummary& c) { return static_cast<double>(c.count); });
}

inline void write_summary_table(std::ostream& os, const ExperimentResult& r) {
  os << "scenario " << r.scenario.id << ", N=" << r.scenario.spec.n_samples << ", " << r.replicates
     << " replicates (" << r.failures << " failed)\n";
  for (const auto& [reason, count] : r.failure_reasons) os << "  failure " << reason << ": " << count << '\n';
  os << std::left << std::setw(8) << "" << std::right;
  for (const auto& c : r.columns) os << std::setw(12) << c.name;
  os << '\n' << std::fixed << std::setprecision(4);
  auto row = [&](const char* label, auto get) {
    os << std::left << std::setw(8) << label << std::right;
    for (const auto& c : r.columns) os << std::setw(12) << get(c);
    os << '\n';
  };
  row("truth", [](const ColumnSummary& c) { return c.truth; });
  row("mean", [](const ColumnSummary& c) { return c.mean; });
  row("sd", [](const ColumnSummary& c) { return c.sd; });
  row("rmse", [](const ColumnSummary& c) { return c.rmse; });
  os << std::defaultfloat;
}

}  // namespace lrdbreak
