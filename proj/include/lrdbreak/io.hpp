#pragma once

// File formats: single-column series CSV, piecewise specs and ground-truth
// sidecars, result documents (JSON) and plot-data CSV.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lrdbreak/error.hpp"
#include "lrdbreak/experiment.hpp"
#include "lrdbreak/pipeline.hpp"
#include "lrdbreak/synth.hpp"

namespace lrdbreak {

inline constexpr const char* result_schema_version = "lrdbreak-result/1";
inline constexpr const char* truth_schema_version = "lrdbreak-truth/1";

// ---------------------------------------------------------------------------
// Numbers

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error(ErrorCode::io_failure, "cannot format number");
  return std::string(buf, end);
}

inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

inline double number_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

// ---------------------------------------------------------------------------
// Series CSV: header `x`, one value per line

inline std::vector<double> parse_series_csv(std::istream& in, const std::string& origin = "<stream>") {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<double> xs;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    const std::string_view field(line.data() + first, last - first + 1);
    if (!header) {
      if (field != "x")
        throw Error(ErrorCode::parse_error, origin + ": expected header 'x', found '" + std::string(field) + "'");
      header = true;
      continue;
    }
    double v = 0.0;
    const char* b = field.data();
    if (*b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
      throw Error(ErrorCode::parse_error, origin + ":" + std::to_string(lineno) + ": not a number: '" +
                                             std::string(field) + "'");
    if (!std::isfinite(v))
      throw Error(ErrorCode::parse_error, origin + ":" + std::to_string(lineno) + ": non-finite value");
    xs.push_back(v);
  }
  if (!header) throw Error(ErrorCode::parse_error, origin + ": empty file");
  return xs;
}

inline TimeSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot read " + path.string());
  TimeSeries ts;
  ts.values = parse_series_csv(in, path.string());
  ts.validate();
  return ts;
}

inline void write_series_csv(std::ostream& os, std::span<const double> xs) {
  os << "x\n";
  for (double v : xs) os << format_double(v) << '\n';
}

inline void write_series_csv(const std::filesystem::path& path, std::span<const double> xs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  write_series_csv(out, xs);
  if (!out) throw Error(ErrorCode::io_failure, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Piecewise specs

inline nlohmann::json segment_to_json(const SegmentSpec& s) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FbmSpec>) {
          return {{"family", "fbm"}, {"hurst", v.hurst}, {"sigma2", v.variance_scale}};
        } else {
          switch (v.family) {
            case Family::fgn: return {{"family", "fgn"}, {"hurst", v.hurst}, {"sigma2", v.variance_scale}};
            case Family::farima: return {{"family", "farima"}, {"d", v.memory}, {"sigma2", v.variance_scale}};
            case Family::white_noise: return {{"family", "white"}, {"sigma2", v.variance_scale}};
          }
          return {};
        }
      },
      s);
}

inline SegmentSpec segment_from_json(const nlohmann::json& j) {
  try {
    const auto family = j.at("family").get<std::string>();
    const double s2 = j.value("sigma2", 1.0);
    if (family == "fbm") return FbmSpec{j.at("hurst").get<double>(), s2};
    if (family == "fgn") return StationarySpec::fgn(j.at("hurst").get<double>(), s2);
    if (family == "farima") return StationarySpec::farima(j.at("d").get<double>(), s2);
    if (family == "white") return StationarySpec::white(s2);
    throw Error(ErrorCode::invalid_spec, "unknown segment family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_spec, std::string("malformed segment spec: ") + e.what());
  }
}

inline nlohmann::json spec_to_json(const PiecewiseSpec& s) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& seg : s.segments) segs.push_back(segment_to_json(seg));
  return {{"n", s.n_samples},
          {"change_fractions", s.change_fractions},
          {"segments", segs},
          {"seed", s.seed},
          {"level_pasting", s.level_pasting}};
}

inline PiecewiseSpec spec_from_json(const nlohmann::json& j) {
  PiecewiseSpec s;
  try {
    s.n_samples = j.at("n").get<std::size_t>();
    s.change_fractions = j.value("change_fractions", std::vector<double>{});
    for (const auto& seg : j.at("segments")) s.segments.push_back(segment_from_json(seg));
    s.seed = j.value("seed", std::uint64_t{0});
    s.level_pasting = j.value("level_pasting", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_spec, std::string("malformed piecewise spec: ") + e.what());
  }
  s.validate();
  return s;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io_failure, "write failed for " + path.string());
}

/// Ground truth next to a simulated series.
inline nlohmann::json truth_document(const Scenario& sc, const PiecewiseSpec& spec) {
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t i = 0; i < sc.names.size(); ++i) params[sc.names[i]] = sc.truth[i];
  const auto b = spec.boundaries();
  return {{"schema_version", truth_schema_version},
          {"scenario", sc.id},
          {"regime", std::string(to_string(sc.regime))},
          {"n", spec.n_samples},
          {"seed", spec.seed},
          {"change_points", std::vector<std::size_t>(b.begin() + 1, b.end() - 1)},
          {"change_fractions", spec.change_fractions},
          {"parameters", params},
          {"spec", spec_to_json(spec)}};
}

/// `dir/series.csv` -> `dir/series.truth.json`.
inline std::filesystem::path truth_path_for(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".truth.json");
  return p;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  std::string input;
  std::string output;
  Regime regime = Regime::lrd;
  std::size_t m = 0;
  std::optional<double> kappa;
  std::optional<double> base_scale;
  std::vector<double> multipliers = ScaleGrid::default_multipliers();
  std::string wavelet = "poly4";
  std::optional<std::size_t> min_seg;
  std::uint64_t seed = 1;
  std::string gamma_table;
  std::string gamma_method = "monte_carlo";
  std::size_t gamma_replicates = 500;
  std::uint64_t gamma_seed = 20070101;
  double margin_cap_fraction = RefineOptions{}.margin_cap_fraction;
  std::string scenario;
  std::size_t replicates = 50;

  AnalysisConfig analysis() const {
    AnalysisConfig c;
    c.regime = regime;
    c.m = m;
    c.kappa = kappa;
    c.base_scale = base_scale;
    c.multipliers = multipliers;
    c.wavelet = wavelet;
    c.min_seg = min_seg;
    c.refine.margin_cap_fraction = margin_cap_fraction;
    if (gamma_method == "monte_carlo") c.gamma_method = GammaMethod::monte_carlo;
    else if (gamma_method == "analytic_fbm") c.gamma_method = GammaMethod::analytic_fbm;
    else throw Error(ErrorCode::invalid_spec, "unknown Gamma method '" + gamma_method + "'");
    c.gamma_replicates = gamma_replicates;
    c.gamma_seed = gamma_seed;
    return c;
  }

  /// Checks scale and search-space rules for a series of length N before any compute.
  void validate(std::optional<std::size_t> n = std::nullopt) const {
    if (!(margin_cap_fraction > 0.0 && margin_cap_fraction < 0.5))
      throw Error(ErrorCode::invalid_spec, "margin cap fraction must lie in (0, 1/2)");
    if (gamma_replicates < 200) throw Error(ErrorCode::invalid_spec, "Gamma needs at least 200 replicates");
    const auto cfg = analysis();
    if (cfg.gamma_method == GammaMethod::analytic_fbm && regime != Regime::fbm)
      throw Error(ErrorCode::invalid_spec, "analytic Gamma exists only for the FBM regime");
    if (!find_wavelet(wavelet).supports(regime))
      throw Error(ErrorCode::unknown_wavelet, "wavelet '" + wavelet + "' does not meet the regime's conditions");
    if (n) {
      const auto grid = cfg.grid(*n);
      const auto space = SearchSpace::make(*n, m, grid, min_seg);
      if (space.candidates.size() < m || *n < (m + 1) * space.min_seg)
        throw Error(ErrorCode::infeasible_search_space,
                    "series too short for " + std::to_string(m) + " change points with min_seg " +
                        std::to_string(space.min_seg));
    }
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline nlohmann::json config_to_json(const RunConfig& c) {
  auto opt = [](const auto& o) { return o ? nlohmann::json(*o) : nlohmann::json(); };
  return {{"input", c.input},
          {"output", c.output},
          {"regime", std::string(to_string(c.regime))},
          {"m", c.m},
          {"kappa", opt(c.kappa)},
          {"base_scale", opt(c.base_scale)},
          {"multipliers", c.multipliers},
          {"wavelet", c.wavelet},
          {"min_seg", opt(c.min_seg)},
          {"seed", c.seed},
          {"gamma_table", c.gamma_table},
          {"gamma_method", c.gamma_method},
          {"gamma_replicates", c.gamma_replicates},
          {"gamma_seed", c.gamma_seed},
          {"margin_cap_fraction", c.margin_cap_fraction},
          {"scenario", c.scenario},
          {"replicates", c.replicates}};
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    c.input = j.value("input", "");
    c.output = j.value("output", "");
    c.regime = parse_regime(j.value("regime", "lrd"));
    c.m = j.value("m", std::size_t{0});
    if (j.contains("kappa") && !j["kappa"].is_null()) c.kappa = j["kappa"].get<double>();
    if (j.contains("base_scale") && !j["base_scale"].is_null()) c.base_scale = j["base_scale"].get<double>();
    if (j.contains("multipliers")) c.multipliers = j["multipliers"].get<std::vector<double>>();
    c.wavelet = j.value("wavelet", "poly4");
    if (j.contains("min_seg") && !j["min_seg"].is_null()) c.min_seg = j["min_seg"].get<std::size_t>();
    c.seed = j.value("seed", std::uint64_t{1});
    c.gamma_table = j.value("gamma_table", "");
    c.gamma_method = j.value("gamma_method", "monte_carlo");
    c.gamma_replicates = j.value("gamma_replicates", std::size_t{500});
    c.gamma_seed = j.value("gamma_seed", std::uint64_t{20070101});
    c.margin_cap_fraction = j.value("margin_cap_fraction", RefineOptions{}.margin_cap_fraction);
    c.scenario = j.value("scenario", "");
    c.replicates = j.value("replicates", std::size_t{50});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_spec, std::string("malformed run configuration: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Result document

struct EstimateRecord {
  double alpha = 0.0, log_beta = 0.0, intercept_l1 = 0.0;
  double ci_low = 0.0, ci_high = 0.0;
  double parameter = 0.0, parameter_ci_low = 0.0, parameter_ci_high = 0.0;
  std::vector<double> covariance;  ///< row-major 2x2
};

struct SegmentRecord {
  std::size_t index = 0;
  std::size_t detected_start = 0, detected_end = 0;
  std::size_t start = 0, end = 0;
  bool ok = false;
  std::string reason;
  std::vector<double> y;
  std::optional<EstimateRecord> ols, fgls;
  double t_stat = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
  double sigma_minus_m_min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
};

struct PlotLine {
  std::size_t segment = 0;
  std::string method;  ///< "ols" or "fgls"
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

struct ResultDocument {
  std::string schema_version = result_schema_version;
  RunConfig config;
  std::size_t n = 0;
  std::size_t base_scale = 0;
  std::vector<std::size_t> scales;
  std::vector<double> log_scales;
  std::vector<std::size_t> k_hat;
  std::vector<double> tau_hat;
  double contrast_value = 0.0;
  std::size_t grid_step = 0, min_seg = 0, candidate_count = 0;
  double v_n = 0.0;
  std::size_t margin = 0;
  double spread = 0.0;
  std::vector<SegmentRecord> segments;
  std::vector<Warning> warnings;
  std::vector<PlotLine> lines;
};

namespace detail {

inline EstimateRecord to_record(const ParameterEstimate& e) {
  EstimateRecord r{e.alpha, e.log_beta, e.intercept_l1, e.ci_low, e.ci_high, e.parameter, e.parameter_ci_low,
                   e.parameter_ci_high, {}};
  r.covariance = {e.covariance(0, 0), e.covariance(0, 1), e.covariance(1, 0), e.covariance(1, 1)};
  return r;
}

inline nlohmann::json to_json(const EstimateRecord& r) {
  return {{"alpha", r.alpha},
          {"log_beta", r.log_beta},
          {"beta", std::exp(r.log_beta)},
          {"intercept_l1", r.intercept_l1},
          {"ci", {r.ci_low, r.ci_high}},
          {"parameter", r.parameter},
          {"parameter_ci", {r.parameter_ci_low, r.parameter_ci_high}},
          {"covariance", r.covariance}};
}

inline EstimateRecord estimate_from_json(const nlohmann::json& j) {
  EstimateRecord r;
  r.alpha = j.at("alpha").get<double>();
  r.log_beta = j.at("log_beta").get<double>();
  r.intercept_l1 = j.at("intercept_l1").get<double>();
  r.ci_low = j.at("ci").at(0).get<double>();
  r.ci_high = j.at("ci").at(1).get<double>();
  r.parameter = j.at("parameter").get<double>();
  r.parameter_ci_low = j.at("parameter_ci").at(0).get<double>();
  r.parameter_ci_high = j.at("parameter_ci").at(1).get<double>();
  r.covariance = j.at("covariance").get<std::vector<double>>();
  return r;
}

}  // namespace detail

inline ResultDocument make_result_document(const RunConfig& cfg, const Analysis& a) {
  ResultDocument d;
  d.config = cfg;
  d.n = a.detection.n;
  d.base_scale = a.grid.base_scale;
  d.scales = a.grid.scales;
  d.log_scales = a.grid.log_scales();
  d.k_hat = a.detection.k_hat;
  d.tau_hat = a.detection.tau_hat;
  d.contrast_value = a.detection.contrast_value;
  d.grid_step = a.detection.grid_step;
  d.min_seg = a.detection.min_seg;
  d.candidate_count = a.detection.candidate_count;
  d.v_n = a.refined.v_n;
  d.margin = a.refined.margin;
  d.spread = a.refined.spread;
  d.warnings = a.warnings;
  const double x0 = d.log_scales.front(), x1 = d.log_scales.back();
  for (const auto& e : a.estimates) {
    SegmentRecord s;
    s.index = e.index;
    s.detected_start = e.segment.detected_start;
    s.detected_end = e.segment.detected_end;
    s.start = e.segment.start;
    s.end = e.segment.end;
    s.ok = e.ok;
    s.reason = e.reason;
    if (e.ok) {
      s.y = e.y;
      s.ols = detail::to_record(e.ols);
      s.fgls = detail::to_record(e.fgls);
      s.t_stat = e.t_stat;
      s.p_value = e.p_value;
      s.sigma_minus_m_min_eigenvalue = e.sigma_minus_m_min_eigenvalue;
      for (const auto* rec : {&*s.ols, &*s.fgls})
        d.lines.push_back(PlotLine{s.index, rec == &*s.ols ? "ols" : "fgls", x0, rec->log_beta + rec->alpha * x0, x1,
                                   rec->log_beta + rec->alpha * x1});
    }
    d.segments.push_back(std::move(s));
  }
  return d;
}

inline nlohmann::json to_json(const ResultDocument& d) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : d.segments) {
    nlohmann::json y = nlohmann::json::array();
    for (double v : s.y) y.push_back(number_or_null(v));
    segs.push_back({{"index", s.index},
                    {"detected", {s.detected_start, s.detected_end}},
                    {"refined", {s.start, s.end}},
                    {"ok", s.ok},
                    {"reason", s.reason},
                    {"y", y},
                    {"ols", s.ols ? detail::to_json(*s.ols) : nlohmann::json()},
                    {"fgls", s.fgls ? detail::to_json(*s.fgls) : nlohmann::json()},
                    {"t_stat", number_or_null(s.t_stat)},
                    {"p_value", number_or_null(s.p_value)},
                    {"sigma_minus_m_min_eigenvalue", number_or_null(s.sigma_minus_m_min_eigenvalue)}});
  }
  nlohmann::json warnings = nlohmann::json::array();
  for (const auto& w : d.warnings) warnings.push_back({{"code", w.code}, {"message", w.message}});
  nlohmann::json points = nlohmann::json::array();
  for (const auto& s : d.segments)
    for (std::size_t i = 0; i < s.y.size(); ++i)
      points.push_back({{"segment", s.index}, {"x", d.log_scales[i]}, {"y", s.y[i]}});
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& l : d.lines)
    lines.push_back({{"segment", l.segment}, {"method", l.method}, {"x0", l.x0}, {"y0", l.y0}, {"x1", l.x1},
                     {"y1", l.y1}});
  return {{"schema_version", d.schema_version},
          {"config", config_to_json(d.config)},
          {"n", d.n},
          {"base_scale", d.base_scale},
          {"scales", d.scales},
          {"log_scales", d.log_scales},
          {"k_hat", d.k_hat},
          {"tau_hat", d.tau_hat},
          {"contrast_value", d.contrast_value},
          {"search", {{"grid_step", d.grid_step}, {"min_seg", d.min_seg}, {"candidates", d.candidate_count}}},
          {"refinement", {{"v_n", d.v_n}, {"margin", d.margin}, {"spread", d.spread}}},
          {"segments", segs},
          {"warnings", warnings},
          {"plot", {{"points", points}, {"lines", lines}}}};
}

inline ResultDocument result_from_json(const nlohmann::json& j) {
  ResultDocument d;
  try {
    d.schema_version = j.at("schema_version").get<std::string>();
    if (d.schema_version != result_schema_version)
      throw Error(ErrorCode::parse_error, "unsupported result schema '" + d.schema_version + "'");
    d.config = config_from_json(j.at("config"));
    d.n = j.at("n").get<std::size_t>();
    d.base_scale = j.at("base_scale").get<std::size_t>();
    d.scales = j.at("scales").get<std::vector<std::size_t>>();
    d.log_scales = j.at("log_scales").get<std::vector<double>>();
    d.k_hat = j.at("k_hat").get<std::vector<std::size_t>>();
    d.tau_hat = j.at("tau_hat").get<std::vector<double>>();
    d.contrast_value = j.at("contrast_value").get<double>();
    d.grid_step = j.at("search").at("grid_step").get<std::size_t>();
    d.min_seg = j.at("search").at("min_seg").get<std::size_t>();
    d.candidate_count = j.at("search").at("candidates").get<std::size_t>();
    d.v_n = j.at("refinement").at("v_n").get<double>();
    d.margin = j.at("refinement").at("margin").get<std::size_t>();
    d.spread = j.at("refinement").at("spread").get<double>();
    for (const auto& s : j.at("segments")) {
      SegmentRecord r;
      r.index = s.at("index").get<std::size_t>();
      r.detected_start = s.at("detected").at(0).get<std::size_t>();
      r.detected_end = s.at("detected").at(1).get<std::size_t>();
      r.start = s.at("refined").at(0).get<std::size_t>();
      r.end = s.at("refined").at(1).get<std::size_t>();
      r.ok = s.at("ok").get<bool>();
      r.reason = s.at("reason").get<std::string>();
      for (const auto& v : s.at("y")) r.y.push_back(number_from(v));
      if (!s.at("ols").is_null()) r.ols = detail::estimate_from_json(s["ols"]);
      if (!s.at("fgls").is_null()) r.fgls = detail::estimate_from_json(s["fgls"]);
      r.t_stat = number_from(s.at("t_stat"));
      r.p_value = number_from(s.at("p_value"));
      r.sigma_minus_m_min_eigenvalue = number_from(s.at("sigma_minus_m_min_eigenvalue"));
      d.segments.push_back(std::move(r));
    }
    for (const auto& w : j.at("warnings"))
      d.warnings.push_back(Warning{w.at("code").get<std::string>(), w.at("message").get<std::string>()});
    for (const auto& l : j.at("plot").at("lines"))
      d.lines.push_back(PlotLine{l.at("segment").get<std::size_t>(), l.at("method").get<std::string>(),
                                 l.at("x0").get<double>(), l.at("y0").get<double>(), l.at("x1").get<double>(),
                                 l.at("y1").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed result document: ") + e.what());
  }
  return d;
}

/// Long-format plot data: `series,segment,x,y`. Series are `points` (log scale,
/// log variance), `ols` and `fgls` (fitted line endpoints) and `changepoint`
/// (x = k^, y = tau^).
inline void write_plot_csv(std::ostream& os, const ResultDocument& d) {
  os << "series,segment,x,y\n";
  for (const auto& s : d.segments)
    for (std::size_t i = 0; i < s.y.size(); ++i)
      os << "points," << s.index << ',' << format_double(d.log_scales[i]) << ',' << format_double(s.y[i]) << '\n';
  for (const auto& l : d.lines) {
    os << l.method << ',' << l.segment << ',' << format_double(l.x0) << ',' << format_double(l.y0) << '\n';
    os << l.method << ',' << l.segment << ',' << format_double(l.x1) << ',' << format_double(l.y1) << '\n';
  }
  for (std::size_t j = 0; j < d.k_hat.size(); ++j)
    os << "changepoint," << j + 1 << ',' << d.k_hat[j] << ',' << format_double(d.tau_hat[j]) << '\n';
}

/// `out.json` -> `out.plot.csv`.
inline std::filesystem::path plot_path_for(const std::filesystem::path& json) {
  auto p = json;
  p.replace_extension(".plot.csv");
  return p;
}

}  // namespace lrdbreak
