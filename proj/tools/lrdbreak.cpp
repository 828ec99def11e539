// lrdbreak: simulate piecewise series, detect exponent changes, run Monte Carlo
// experiments and (re)build Gamma tables.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrdbreak/error.hpp"
#include "lrdbreak/experiment.hpp"
#include "lrdbreak/gamma.hpp"
#include "lrdbreak/io.hpp"
#include "lrdbreak/pipeline.hpp"
#include "lrdbreak/synth.hpp"

namespace fs = std::filesystem;
using namespace lrdbreak;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_config = 2;
constexpr int exit_data = 3;
constexpr int exit_numerical = 4;
constexpr int exit_io = 5;

constexpr const char* gamma_dir_env = "LRDBREAK_GAMMA_DIR";

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return exit_config;
    case ErrorKind::data: return exit_data;
    case ErrorKind::numerical: return exit_numerical;
    case ErrorKind::io: return exit_io;
  }
  return exit_internal;
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return "config";
    case ErrorKind::data: return "data";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
  }
  return "internal";
}

void report_warnings(const std::vector<Warning>& ws) {
  for (const auto& w : ws) std::cerr << "warning [" << w.code << "] " << w.message << '\n';
}

// Options shared by detect, experiment and gamma-table.
struct AnalysisFlags {
  std::string regime = "lrd";
  std::size_t m = 0;
  std::optional<double> kappa;
  std::optional<double> base_scale;
  std::vector<double> scales = ScaleGrid::default_multipliers();
  std::string wavelet = "poly4";
  std::optional<std::size_t> min_seg;
  std::string gamma_table;
  std::string gamma_method = "monte_carlo";
  std::size_t gamma_replicates = 500;
  std::uint64_t gamma_seed = 20070101;
  double margin_cap = RefineOptions{}.margin_cap_fraction;

  void add_to(CLI::App* app, bool with_m, bool with_regime = true) {
    if (with_regime)
      app->add_option("--regime", regime, "lrd (stationary long memory) or fbm (self-similar paths)")
          ->check(CLI::IsMember({"lrd", "fbm"}));
    if (with_m) app->add_option("--m", m, "number of change points");
    app->add_option("--kappa", kappa, "base scale exponent offset (default 0.05 lrd, 0.02 fbm)");
    app->add_option("--base-scale", base_scale, "base scale a_N (overrides --kappa)");
    app->add_option("--scales", scales, "scale multipliers r_1<...<r_l")->delimiter(',');
    app->add_option("--wavelet", wavelet, "mother wavelet")->check(CLI::IsMember(wavelet_names()));
    if (with_m) {
      app->add_option("--min-seg", min_seg, "minimum segment length");
      app->add_option("--margin-cap", margin_cap, "largest trim as a fraction of a detected segment");
    }
    app->add_option("--gamma-table", gamma_table,
                    std::string("Gamma table file or directory (default: $") + gamma_dir_env + ")");
    app->add_option("--gamma-method", gamma_method, "monte_carlo or analytic_fbm")
        ->check(CLI::IsMember({"monte_carlo", "analytic_fbm"}));
    app->add_option("--gamma-replicates", gamma_replicates, "Monte Carlo paths per Gamma node");
    app->add_option("--gamma-seed", gamma_seed, "master seed of the Gamma Monte Carlo");
  }

  void fill(RunConfig& c) const {
    c.regime = parse_regime(regime);
    c.m = m;
    c.kappa = kappa;
    c.base_scale = base_scale;
    c.multipliers = scales;
    c.wavelet = wavelet;
    c.min_seg = min_seg;
    c.gamma_table = gamma_table;
    c.gamma_method = gamma_method;
    c.gamma_replicates = gamma_replicates;
    c.gamma_seed = gamma_seed;
    c.margin_cap_fraction = margin_cap;
  }
};

/// A `.json` path is used as is; anything else is a directory that gets a
/// key-derived file name. Without a flag, the environment's directory.
std::optional<fs::path> gamma_path(const std::string& flag, const GammaKey& key) {
  fs::path base;
  if (!flag.empty()) {
    base = flag;
    if (!fs::is_directory(base) && base.extension() == ".json") return base;
  } else if (const char* env = std::getenv(gamma_dir_env); env && *env) {
    base = env;
  } else {
    return std::nullopt;
  }
  return base / (key.file_stem() + ".json");
}

GammaTable open_gamma(const std::optional<fs::path>& path, const GammaKey& key, std::vector<Warning>& warnings) {
  if (!path) return GammaTable(key);
  return GammaTable::load_or_create(*path, key, &warnings);
}

void save_gamma(const std::optional<fs::path>& path, const GammaTable& t, std::size_t nodes_before) {
  if (!path || t.cached_nodes() == nodes_before) return;
  if (path->has_parent_path()) fs::create_directories(path->parent_path());
  t.save(*path);
}

Scenario resolve_scenario(const std::string& id, const std::string& spec_file, const std::string& regime,
                          std::optional<std::size_t> n) {
  if (id == "custom") {
    if (spec_file.empty()) throw Error(ErrorCode::invalid_spec, "scenario 'custom' needs --spec FILE");
    auto spec = spec_from_json(read_json_file(spec_file));
    if (n) spec.n_samples = *n;
    return make_custom_scenario("custom", parse_regime(regime), spec);
  }
  return make_scenario(id, n);
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario = "farima-1cp";
  std::string spec;
  std::string regime = "lrd";
  std::optional<std::size_t> n;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto sc = resolve_scenario(a.scenario, a.spec, a.regime, a.n);
  PiecewiseSpec spec = sc.spec;
  spec.seed = a.seed;
  const auto ts = gen_piecewise(spec);
  const fs::path out(a.output);
  write_series_csv(out, ts.values);
  write_json_file(truth_path_for(out), truth_document(sc, spec));
  std::cerr << "wrote " << ts.values.size() << " samples to " << out.string() << '\n';
  return exit_ok;
}

struct DetectArgs {
  AnalysisFlags flags;
  std::string input;
  std::string output;
  std::string config;
};

int cmd_detect(const DetectArgs& a, const CLI::App& sub) {
  RunConfig cfg;
  if (!a.config.empty()) {
    auto j = read_json_file(a.config);
    cfg = config_from_json(j.contains("config") ? j["config"] : j);
  } else {
    a.flags.fill(cfg);
  }
  // Explicit paths on the command line win over a loaded configuration.
  if (sub.count("--input") > 0 || cfg.input.empty()) cfg.input = a.input;
  if (sub.count("--output") > 0 || cfg.output.empty()) cfg.output = a.output;
  if (cfg.input.empty()) throw Error(ErrorCode::invalid_spec, "--input is required");
  if (cfg.output.empty()) throw Error(ErrorCode::invalid_spec, "--output is required");

  cfg.validate();
  const auto ts = read_series_csv(cfg.input);
  cfg.validate(ts.last_index());

  const auto acfg = cfg.analysis();
  const auto key = acfg.gamma_key(acfg.grid(ts.last_index()));
  std::vector<Warning> table_warnings;
  const auto gpath = gamma_path(cfg.gamma_table, key);
  auto table = open_gamma(gpath, key, table_warnings);
  const auto before = table.cached_nodes();
  auto analysis = analyze(ts, acfg, table);
  analysis.warnings.insert(analysis.warnings.begin(), table_warnings.begin(), table_warnings.end());
  save_gamma(gpath, table, before);

  const auto doc = make_result_document(cfg, analysis);
  const fs::path out(cfg.output);
  write_json_file(out, to_json(doc));
  std::ofstream plot(plot_path_for(out), std::ios::binary);
  if (!plot) throw Error(ErrorCode::io_failure, "cannot write " + plot_path_for(out).string());
  write_plot_csv(plot, doc);
  report_warnings(doc.warnings);

  std::cout << "tau_hat:";
  for (double t : doc.tau_hat) std::cout << ' ' << t;
  std::cout << '\n';
  for (const auto& s : doc.segments) {
    std::cout << "segment " << s.index << " [" << s.start << ", " << s.end << ")";
    if (s.ok)
      std::cout << (cfg.regime == Regime::lrd ? " D" : " H") << "_ols=" << s.ols->parameter
                << " fgls=" << s.fgls->parameter << " [" << s.fgls->parameter_ci_low << ", "
                << s.fgls->parameter_ci_high << "] T=" << s.t_stat << " p=" << s.p_value;
    else
      std::cout << " unusable: " << s.reason;
    std::cout << '\n';
  }
  return exit_ok;
}

struct ExperimentArgs {
  AnalysisFlags flags;
  std::string scenario = "farima-1cp";
  std::string spec;
  std::optional<std::size_t> n;
  std::size_t replicates = 50;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string output;
};

int cmd_experiment(const ExperimentArgs& a) {
  if (a.replicates < 10) throw Error(ErrorCode::invalid_spec, "experiments need at least 10 replicates");
  const auto sc = resolve_scenario(a.scenario, a.spec, a.flags.regime, a.n);
  RunConfig cfg;
  a.flags.fill(cfg);
  cfg.regime = sc.regime;
  cfg.m = sc.spec.change_fractions.size();
  cfg.scenario = sc.id;
  cfg.replicates = a.replicates;
  cfg.seed = a.seed;
  cfg.validate(sc.spec.n_samples);

  auto acfg = cfg.analysis();
  const auto key = acfg.gamma_key(acfg.grid(sc.spec.n_samples));
  std::vector<Warning> table_warnings;
  const auto gpath = gamma_path(cfg.gamma_table, key);
  auto table = open_gamma(gpath, key, table_warnings);
  report_warnings(table_warnings);
  const auto before = table.cached_nodes();
  const auto res = run_experiment(sc, acfg, table, a.replicates, a.seed, a.threads);
  save_gamma(gpath, table, before);

  write_summary_table(std::cout, res);
  if (!a.output.empty()) {
    const fs::path out(a.output);
    std::ofstream csv(out, std::ios::binary);
    if (!csv) throw Error(ErrorCode::io_failure, "cannot write " + out.string());
    write_summary_csv(csv, res);
    auto txt = out;
    txt.replace_extension(".txt");
    std::ofstream table_file(txt, std::ios::binary);
    if (!table_file) throw Error(ErrorCode::io_failure, "cannot write " + txt.string());
    write_summary_table(table_file, res);
  }
  return exit_ok;
}

struct GammaArgs {
  AnalysisFlags flags;
  std::size_t n = 0;
  std::string output;
};

int cmd_gamma_table(const GammaArgs& a) {
  RunConfig cfg;
  a.flags.fill(cfg);
  cfg.validate();
  if (!cfg.base_scale && a.n == 0) throw Error(ErrorCode::invalid_spec, "give --n or --base-scale");
  const auto acfg = cfg.analysis();
  const auto key = acfg.gamma_key(acfg.grid(a.n));
  std::optional<fs::path> path;
  if (!a.output.empty()) path = gamma_path(a.output, key);
  else path = gamma_path(cfg.gamma_table, key);
  if (!path) throw Error(ErrorCode::invalid_spec, std::string("give --output, --gamma-table or set ") + gamma_dir_env);
  GammaTable table(key);  // rebuilt from scratch
  table.build_all();
  if (path->has_parent_path()) fs::create_directories(path->parent_path());
  table.save(*path);
  std::cerr << "wrote " << table.cached_nodes() << " Gamma nodes to " << path->string() << '\n';
  std::cout << path->string() << '\n';
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Change points in long-range dependence and self-similarity exponents"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "generate a piecewise series with known change points");
  s->add_option("--scenario", sim.scenario, "farima-1cp, fbm-2cp or custom")
      ->check(CLI::IsMember({"farima-1cp", "fbm-2cp", "custom"}));
  s->add_option("--spec", sim.spec, "piecewise spec JSON for the custom scenario");
  s->add_option("--regime", sim.regime, "regime recorded for the custom scenario")->check(CLI::IsMember({"lrd", "fbm"}));
  s->add_option("--n", sim.n, "sample size N");
  s->add_option("--seed", sim.seed, "random seed");
  s->add_option("--output", sim.output, "series CSV (ground truth goes to <stem>.truth.json)")->required();

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "detect m change points and estimate per-segment exponents");
  d->add_option("--input", det.input, "series CSV with header x");
  d->add_option("--output", det.output, "result JSON (plot data goes to <stem>.plot.csv)");
  d->add_option("--config", det.config, "run configuration, or a result document whose config to replay");
  det.flags.add_to(d, true);

  ExperimentArgs ex;
  auto* e = app.add_subcommand("experiment", "Monte Carlo replicates of a scenario");
  e->add_option("--scenario", ex.scenario, "farima-1cp, fbm-2cp or custom")
      ->check(CLI::IsMember({"farima-1cp", "fbm-2cp", "custom"}));
  e->add_option("--spec", ex.spec, "piecewise spec JSON for the custom scenario");
  e->add_option("--n", ex.n, "sample size N");
  e->add_option("--replicates", ex.replicates, "number of replicates (at least 10)");
  e->add_option("--seed", ex.seed, "master seed");
  e->add_option("--threads", ex.threads, "worker threads")->default_val(std::max(1u, std::thread::hardware_concurrency()));
  e->add_option("--output", ex.output, "summary CSV (a text table goes to <stem>.txt)");
  ex.flags.add_to(e, false);
  e->add_option("--min-seg", ex.flags.min_seg, "minimum segment length");
  e->add_option("--margin-cap", ex.flags.margin_cap, "largest trim as a fraction of a detected segment");

  GammaArgs gt;
  auto* g = app.add_subcommand("gamma-table", "rebuild every node of a Gamma table");
  g->add_option("--n", gt.n, "sample size the base scale rule is applied to");
  g->add_option("--output", gt.output, "table file or directory");
  gt.flags.add_to(g, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return exit_config;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*d) return cmd_detect(det, *d);
    if (*e) return cmd_experiment(ex);
    if (*g) return cmd_gamma_table(gt);
  } catch (const Error& err) {
    nlohmann::json j{{"error", std::string(to_string(err.code()))},
                     {"kind", kind_name(err.kind())},
                     {"message", err.what()}};
    std::cerr << j.dump() << '\n';
    return exit_code(err.kind());
  } catch (const fs::filesystem_error& err) {
    std::cerr << nlohmann::json{{"error", "io_failure"}, {"kind", "io"}, {"message", err.what()}}.dump() << '\n';
    return exit_io;
  } catch (const std::exception& err) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"kind", "internal"}, {"message", err.what()}}.dump() << '\n';
    return exit_internal;
  }
  return exit_internal;
}
