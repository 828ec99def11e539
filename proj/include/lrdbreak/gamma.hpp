#pragma once

// Asymptotic covariance Gamma of sqrt(n/a) (log S(r_i a))_i for a homogeneous
// segment with exponent alpha, by simulation (either regime) or from the FBM
// covariance kernel (FBM regime), plus an alpha-grid cache persisted as JSON.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>
#include <json.hpp>

#include "lrdbreak/error.hpp"
#include "lrdbreak/rng.hpp"
#include "lrdbreak/synth.hpp"
#include "lrdbreak/wavelets.hpp"
#include "lrdbreak/wvar.hpp"

namespace lrdbreak {

enum class GammaMethod { monte_carlo, analytic_fbm };

constexpr std::string_view to_string(GammaMethod m) {
  return m == GammaMethod::monte_carlo ? "monte_carlo" : "analytic_fbm";
}

struct GammaMatrix {
  Eigen::MatrixXd matrix;
  double alpha = 0.0;
  GammaMethod provenance = GammaMethod::monte_carlo;
  std::size_t replicates = 0;  ///< MC only
  std::size_t n_ref = 0;       ///< MC only
  int truncation = 0;          ///< analytic only
  std::vector<double> multipliers;
  std::vector<Warning> warnings;
};

/// Open admissible exponent range per regime; LRD also admits the white-noise limit alpha = 0.
inline void check_alpha(Regime regime, double alpha) {
  const bool ok = regime == Regime::lrd ? (alpha >= 0.0 && alpha < 1.0) : (alpha > 1.0 && alpha < 3.0);
  if (!ok)
    throw Error(ErrorCode::alpha_out_of_range, "alpha=" + std::to_string(alpha) + " outside the " +
                                                   std::string(to_string(regime)) + " range");
}

/// Hurst index of the reference process: FBM with H = (alpha-1)/2, or FGN with
/// spectral exponent D = alpha, i.e. H = (alpha+1)/2.
inline double reference_hurst(Regime regime, double alpha) {
  return regime == Regime::fbm ? 0.5 * (alpha - 1.0) : 0.5 * (alpha + 1.0);
}

struct MonteCarloSettings {
  std::size_t replicates = 500;
  std::size_t n_ref = 0;  ///< 0 selects 120 blocks of the coarsest scale
  std::uint64_t seed = 20070101;
  MomentCorrection correction = MomentCorrection::zero_mean;

  std::size_t resolved_n_ref(const std::vector<std::size_t>& scales) const {
    return n_ref > 0 ? n_ref : 120 * scales.back();
  }
};

/// Empirical covariance of sqrt(n_ref/a) log S(s_i) over R homogeneous reference paths.
inline GammaMatrix gamma_mc(double alpha, Regime regime, const std::vector<std::size_t>& scales,
                            std::size_t base_scale, const WaveletSpec& w, const MonteCarloSettings& mc) {
  check_alpha(regime, alpha);
  if (mc.replicates < 200) throw Error(ErrorCode::invalid_spec, "Gamma Monte Carlo needs at least 200 replicates");
  const std::size_t n_ref = mc.resolved_n_ref(scales);
  if (n_ref / scales.back() < 100)
    throw Error(ErrorCode::invalid_spec, "reference path must hold at least 100 blocks of the coarsest scale");
  const double h = reference_hurst(regime, alpha);
  const std::size_t l = scales.size();

  // Increments for FBM, the path itself for FGN; both have n_ref samples after X_0.
  GaussianSampler sampler(autocovariance(StationarySpec::fgn(h), regime == Regime::fbm ? n_ref : n_ref + 1));
  std::vector<DiscreteFilter> filters;
  for (auto s : scales) filters.emplace_back(w, s, mc.correction);

  Eigen::MatrixXd logs(static_cast<Eigen::Index>(mc.replicates), static_cast<Eigen::Index>(l));
  std::vector<double> path(n_ref + 1);
  auto record = [&](std::size_t rep, const std::vector<double>& draw) {
    if (regime == Regime::fbm) {
      path[0] = 0.0;
      std::partial_sum(draw.begin(), draw.end(), path.begin() + 1);
    } else {
      std::copy(draw.begin(), draw.end(), path.begin());
    }
    for (std::size_t i = 0; i < l; ++i) {
      const std::size_t blocks = n_ref / scales[i];
      double sum = 0.0;
      for (std::size_t p = 0; p < blocks; ++p) {
        const double e = filters[i].apply(path, p);
        sum += e * e;
      }
      logs(static_cast<Eigen::Index>(rep), static_cast<Eigen::Index>(i)) = std::log(sum / static_cast<double>(blocks));
    }
  };
  // Paths come in independent pairs from one embedding draw.
  for (std::size_t rep = 0; rep < mc.replicates; rep += 2) {
    Rng rng(derive_seed(mc.seed, rep / 2));
    const bool second = rep + 1 < mc.replicates;
    const auto [first_path, second_path] = sampler.draw_pair(rng, second);
    record(rep, first_path);
    if (second) record(rep + 1, second_path);
  }
  const Eigen::RowVectorXd mean = logs.colwise().mean();
  const Eigen::MatrixXd centered = logs.rowwise() - mean;
  const double norm = static_cast<double>(n_ref) / static_cast<double>(base_scale) /
                      static_cast<double>(mc.replicates - 1);

  GammaMatrix g;
  g.matrix = norm * (centered.transpose() * centered);
  g.alpha = alpha;
  g.provenance = GammaMethod::monte_carlo;
  g.replicates = mc.replicates;
  g.n_ref = n_ref;
  for (auto s : scales) g.multipliers.push_back(static_cast<double>(s) / static_cast<double>(base_scale));
  return g;
}

namespace detail {

/// -(1/2) sqrt(rp rq) int int psi(u) psi(v) |rp u - rq v + delta|^{2H} du dv: the
/// covariance of continuous-time FBM wavelet coefficients at scales rp a and rq a
/// with shift difference delta a, up to the common factor a^{2H+1} sigma^2.
inline double fbm_coefficient_covariance(const WaveletSpec& w, double h, double rp, double rq, double delta) {
  using Gauss = boost::math::quadrature::gauss<double, 10>;
  // The integrand is only C^0 along rp u - rq v + delta = 0; refine when that line crosses the square.
  const bool kink = delta >= -rp - 1e-12 && delta <= rq + 1e-12;
  const int panels = kink ? 32 : 2;
  const double width = 1.0 / panels;
  const double e = 2.0 * h;
  double total = 0.0;
  for (int a = 0; a < panels; ++a) {
    for (int b = 0; b < panels; ++b) {
      const double u0 = a * width, v0 = b * width;
      total += Gauss::integrate(
          [&](double u) {
            const double pu = w(u);
            return pu * Gauss::integrate(
                            [&](double v) { return w(v) * std::pow(std::abs(rp * u - rq * v + delta), e); }, v0,
                            v0 + width);
          },
          u0, u0 + width);
    }
  }
  if (!std::isfinite(total)) throw Error(ErrorCode::quadrature_failure, "non-finite FBM kernel integral");
  return -0.5 * std::sqrt(rp * rq) * total;
}

inline bool integral_like(double r) { return std::abs(r - std::round(r)) < 1e-9 && std::round(r) >= 1.0; }

}  // namespace detail

/// Gamma for FBM via Gaussianity: Cov(d^2, d'^2) = 2 Cov(d, d')^2, linearized
/// through the log and summed over block-shift lags |k| <= K.
inline GammaMatrix gamma_fbm_analytic(double h, const std::vector<double>& multipliers, const WaveletSpec& w,
                                      int truncation = 60) {
  if (!(h > 0.0 && h < 1.0)) throw Error(ErrorCode::domain_error, "Hurst index must lie in (0,1)");
  if (truncation < 50) throw Error(ErrorCode::invalid_spec, "truncation must be at least 50");
  const std::size_t l = multipliers.size();
  std::vector<double> self(l);
  for (std::size_t p = 0; p < l; ++p)
    self[p] = detail::fbm_coefficient_covariance(w, h, multipliers[p], multipliers[p], 0.0);

  GammaMatrix g;
  g.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l));
  g.alpha = 2.0 * h + 1.0;
  g.provenance = GammaMethod::analytic_fbm;
  g.truncation = truncation;
  g.multipliers = multipliers;

  for (std::size_t p = 0; p < l; ++p) {
    for (std::size_t q = p; q < l; ++q) {
      const double rp = multipliers[p], rq = multipliers[q];
      // Offsets r_p i - r_q j repeat with period r_q / gcd(r_p, r_q) in i for integer multipliers.
      std::size_t period = 64;
      if (detail::integral_like(rp) && detail::integral_like(rq)) {
        const auto ip = static_cast<long long>(std::llround(rp)), iq = static_cast<long long>(std::llround(rq));
        period = static_cast<std::size_t>(iq / std::gcd(ip, iq));
      }
      double acc = 0.0, tail = 0.0;
      for (std::size_t i = 0; i < period; ++i) {
        const double base = rp * static_cast<double>(i);
        const auto j0 = static_cast<long long>(std::llround(base / rq));
        for (long long dj = -truncation; dj <= truncation; ++dj) {
          const double delta = base - rq * static_cast<double>(j0 + dj);
          const double rho = detail::fbm_coefficient_covariance(w, h, rp, rq, delta) / std::sqrt(self[p] * self[q]);
          const double term = 2.0 * rho * rho;
          acc += term;
          if (std::abs(dj) == truncation) tail += term;
        }
      }
      const double value = rq * acc / static_cast<double>(period);
      g.matrix(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = value;
      g.matrix(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = value;
      if (tail > 0.01 * acc)
        g.warnings.push_back(Warning{"gamma_truncation", "tail lag term exceeds 1% of the sum"});
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Alpha-grid cache

/// Everything a cached Gamma depends on.
struct GammaKey {
  Regime regime = Regime::lrd;
  GammaMethod method = GammaMethod::monte_carlo;
  std::string wavelet = "poly4";
  std::vector<std::size_t> scales;
  std::size_t base_scale = 0;
  std::size_t replicates = 500;
  std::size_t n_ref = 0;
  std::uint64_t seed = 20070101;
  MomentCorrection correction = MomentCorrection::zero_mean;

  friend bool operator==(const GammaKey&, const GammaKey&) = default;

  MonteCarloSettings monte_carlo() const { return {replicates, n_ref, seed, correction}; }

  std::vector<double> multipliers() const {
    std::vector<double> r;
    for (auto s : scales) r.push_back(static_cast<double>(s) / static_cast<double>(base_scale));
    return r;
  }

  /// A file name that identifies the key, for table directories.
  std::string file_stem() const {
    std::string s = "gamma_" + std::string(to_string(regime)) + "_" + wavelet + "_" +
                    (method == GammaMethod::monte_carlo ? "mc" : "an") + "_a" + std::to_string(base_scale);
    for (auto sc : scales) s += "_" + std::to_string(sc);
    s += "_R" + std::to_string(replicates) + "_n" + std::to_string(n_ref) + "_s" + std::to_string(seed);
    if (correction == MomentCorrection::none) s += "_raw";
    return s;
  }
};

inline constexpr const char* gamma_table_version = "lrdbreak-gamma-table/1";

/// Gamma on an alpha grid (step 0.05), filled lazily, linear between nodes.
/// Concurrent lookups are safe; nodes are computed outside the lock.
class GammaTable {
 public:
  static constexpr double step = 0.05;

  explicit GammaTable(GammaKey key) : key_(std::move(key)) {
    if (key_.method == GammaMethod::analytic_fbm && key_.regime != Regime::fbm)
      throw Error(ErrorCode::invalid_spec, "analytic Gamma exists only for the FBM regime");
    wavelet_ = find_wavelet(key_.wavelet);
  }

  GammaTable(const GammaTable& o) : key_(o.key_), wavelet_(o.wavelet_) {
    std::shared_lock lock(o.mutex_);
    nodes_ = o.nodes_;
  }

  const GammaKey& key() const { return key_; }

  /// Node index range: LRD alpha in [0, 0.95], FBM alpha in [1.05, 2.95].
  int first_node() const { return key_.regime == Regime::lrd ? 0 : 21; }
  int last_node() const { return key_.regime == Regime::lrd ? 19 : 59; }
  static double node_alpha(int idx) { return step * idx; }

  std::size_t cached_nodes() const {
    std::shared_lock lock(mutex_);
    return nodes_.size();
  }

  Eigen::MatrixXd node(int idx) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = nodes_.find(idx); it != nodes_.end()) return it->second;
    }
    Eigen::MatrixXd g = compute(idx);
    std::unique_lock lock(mutex_);
    return nodes_.emplace(idx, std::move(g)).first->second;
  }

  /// Gamma(alpha), clamped into the node range (with a warning) and interpolated.
  Eigen::MatrixXd at(double alpha, std::vector<Warning>* warnings = nullptr) {
    const double lo = node_alpha(first_node()), hi = node_alpha(last_node());
    if (!std::isfinite(alpha)) throw Error(ErrorCode::alpha_out_of_range, "non-finite alpha");
    if (alpha < lo || alpha > hi) {
      if (warnings)
        warnings->push_back(Warning{"alpha_clamped", "alpha=" + std::to_string(alpha) +
                                                         " clamped into the Gamma table range"});
      alpha = std::clamp(alpha, lo, hi);
    }
    const double pos = alpha / step;
    int i = static_cast<int>(std::floor(pos + 1e-12));
    i = std::clamp(i, first_node(), last_node());
    if (i == last_node()) return node(i);
    const double t = std::clamp(pos - i, 0.0, 1.0);
    if (t < 1e-12) return node(i);
    return (1.0 - t) * node(i) + t * node(i + 1);
  }

  void build_all() {
    for (int i = first_node(); i <= last_node(); ++i) node(i);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["version"] = gamma_table_version;
    j["regime"] = std::string(to_string(key_.regime));
    j["method"] = std::string(to_string(key_.method));
    j["wavelet"] = key_.wavelet;
    j["scales"] = key_.scales;
    j["base_scale"] = key_.base_scale;
    j["multipliers"] = key_.multipliers();
    j["l"] = key_.scales.size();
    j["replicates"] = key_.replicates;
    j["n_ref"] = key_.n_ref;
    j["seed"] = key_.seed;
    j["moment_correction"] = key_.correction == MomentCorrection::zero_mean ? "zero_mean" : "none";
    j["step"] = step;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    std::shared_lock lock(mutex_);
    for (const auto& [idx, m] : nodes_) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        rows.push_back(row);
      }
      nodes.push_back({{"index", idx}, {"alpha", node_alpha(idx)}, {"matrix", rows}});
    }
    return j;
  }

  static GammaKey key_from_json(const nlohmann::json& j) {
    if (j.value("version", "") != gamma_table_version)
      throw Error(ErrorCode::table_mismatch, "unsupported Gamma table version");
    GammaKey k;
    k.regime = parse_regime(j.at("regime").get<std::string>());
    k.method = j.at("method").get<std::string>() == "analytic_fbm" ? GammaMethod::analytic_fbm
                                                                   : GammaMethod::monte_carlo;
    k.wavelet = j.at("wavelet").get<std::string>();
    k.scales = j.at("scales").get<std::vector<std::size_t>>();
    k.base_scale = j.at("base_scale").get<std::size_t>();
    k.replicates = j.at("replicates").get<std::size_t>();
    k.n_ref = j.at("n_ref").get<std::size_t>();
    k.seed = j.at("seed").get<std::uint64_t>();
    k.correction = j.at("moment_correction").get<std::string>() == "none" ? MomentCorrection::none
                                                                           : MomentCorrection::zero_mean;
    return k;
  }

  static GammaTable from_json(const nlohmann::json& j) {
    GammaTable t(key_from_json(j));
    for (const auto& n : j.at("nodes")) {
      const auto rows = n.at("matrix").get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.size()) throw Error(ErrorCode::table_mismatch, "Gamma node is not square");
        for (std::size_t c = 0; c < rows.size(); ++c)
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
      if (m.rows() != static_cast<Eigen::Index>(t.key_.scales.size()))
        throw Error(ErrorCode::table_mismatch, "Gamma node dimension differs from the scale count");
      t.nodes_[n.at("index").get<int>()] = std::move(m);
    }
    return t;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write Gamma table " + path.string());
    out << to_json().dump(1) << '\n';
  }

  static GammaTable load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot read Gamma table " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::table_mismatch, std::string("malformed Gamma table: ") + e.what());
    }
    return from_json(j);
  }

  /// Loads `path` if it exists and matches `key`; otherwise starts empty.
  static GammaTable load_or_create(const std::filesystem::path& path, const GammaKey& key,
                                   std::vector<Warning>* warnings = nullptr) {
    if (std::filesystem::exists(path)) {
      try {
        auto t = load(path);
        if (t.key() == key) return t;
        if (warnings) warnings->push_back(Warning{"gamma_table_mismatch", "stored table key differs; rebuilding"});
      } catch (const Error& e) {
        if (warnings) warnings->push_back(Warning{"gamma_table_unreadable", e.what()});
      }
    }
    return GammaTable(key);
  }

 private:
  Eigen::MatrixXd compute(int idx) const {
    const double alpha = node_alpha(idx);
    if (key_.method == GammaMethod::analytic_fbm)
      return gamma_fbm_analytic(reference_hurst(Regime::fbm, alpha), key_.multipliers(), wavelet_).matrix;
    auto mc = key_.monte_carlo();
    mc.seed = derive_seed(key_.seed, static_cast<std::uint64_t>(idx));
    return gamma_mc(alpha, key_.regime, key_.scales, key_.base_scale, wavelet_, mc).matrix;
  }

  GammaKey key_;
  WaveletSpec wavelet_;
  mutable std::shared_mutex mutex_;
  std::map<int, Eigen::MatrixXd> nodes_;
};

}  // namespace lrdbreak
