// cdiag: config-driven diagnostics for mass-coupled stochastic collapse
// dynamics of a relativistic scalar field.
//
// Subcommands: energy-rate, scan-divergence, microcausality, nr-leakage,
// evolve, check-covariance, emit-plot-data. Each run writes a JSON report
// (plus CSV series via emit-plot-data). Exit codes: 0 success,
// 2 invalid configuration or input, 3 a quadrature failed to converge,
// 4 internal error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "collapse/config.hpp"
#include "collapse/diagnostics.hpp"
#include "collapse/evolve.hpp"
#include "collapse/report.hpp"
#include "collapse/version.hpp"

namespace {

using namespace collapse;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitInternal = 4;

struct CliOptions {
  std::string config_path;
  std::string output_dir = ".";
  std::string report_path;  // emit-plot-data only
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  int threads = 1;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  return {std::istreambuf_iterator<char>(in),
          std::istreambuf_iterator<char>()};
}

Report make_report(const RunConfig& cfg, const std::string& subcommand,
                   const std::string& config_bytes) {
  Report r;
  r.toolkit_version = kToolkitVersion;
  r.subcommand = subcommand;
  r.config_hash = fnv1a_hex(config_bytes);
  r.seed = cfg.seed;
  r.request_echo = cfg.raw_json;
  return r;
}

bool all_converged(const Report& r) {
  for (const auto& e : r.results) {
    if (!e.converged) return false;
  }
  for (const auto& s : r.scans) {
    for (const auto& p : s.points) {
      if (!p.converged) return false;
    }
  }
  return true;
}

int finish(const Report& report, const CliOptions& opt,
           const RunConfig& cfg,
           std::chrono::steady_clock::time_point start) {
  namespace fs = std::filesystem;
  fs::create_directories(opt.output_dir);
  const fs::path path =
      fs::path(opt.output_dir) / (cfg.output_stem + ".json");
  write_report(report, path.string());
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  // timing goes to the log stream, never into the artifact
  std::ofstream log(fs::path(opt.output_dir) / (cfg.output_stem + ".log"));
  log << "subcommand=" << report.subcommand << " wall_clock_ms=" << ms
      << "\n";
  std::cerr << "wrote " << path.string() << " (" << ms << " ms)\n";
  if (!all_converged(report)) {
    std::cerr << "warning: at least one quadrature did not converge\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int run_energy_rate(const RunConfig& cfg, const CliOptions& opt,
                    const std::string& bytes) {
  const auto start = std::chrono::steady_clock::now();
  EnergyRateRequest req{cfg.require_state(), cfg.noise, cfg.gamma,
                        cfg.time_horizon, cfg.quadrature};
  IntegralResult value = energy_rate(req);
  Report report = make_report(cfg, "energy-rate", bytes);
  report.results.push_back(ResultEntry::real("energy_moment", value));
  IntegralResult scaled = value;
  scaled.value *= cfg.gamma;
  scaled.error_estimate *= cfg.gamma;
  report.results.push_back(
      ResultEntry::real("first_order_energy_rate", scaled));
  return finish(report, opt, cfg, start);
}

int run_scan(const RunConfig& cfg, const CliOptions& opt,
             const std::string& bytes) {
  const auto start = std::chrono::steady_clock::now();
  EnergyRateRequest req{cfg.require_state(), cfg.noise, cfg.gamma,
                        cfg.time_horizon, cfg.quadrature};
  CutoffScan scan = energy_rate_scan(req, cfg.cutoffs);
  Report report = make_report(cfg, "scan-divergence", bytes);
  ScanEntry entry;
  entry.name = "energy_rate_cutoff_scan";
  entry.verdict = to_string(scan.verdict);
  entry.points = scan.points;
  report.scans.push_back(entry);
  report.verdicts.push_back({"divergence", to_string(scan.verdict)});
  if (cfg.noise.kind() == NoiseCorrelator::Kind::white &&
      scan.verdict == ScanVerdict::diverging)
    report.verdicts.push_back({"white_noise_divergent", "true"});
  return finish(report, opt, cfg, start);
}

int run_microcausality(const RunConfig& cfg, const CliOptions& opt,
                       const std::string& bytes) {
  const auto start = std::chrono::steady_clock::now();
  MicrocausalityRequest req{cfg.separation,
                            Vec3{0, 0, 0},
                            cfg.time_horizon,
                            cfg.noise,
                            cfg.gamma,
                            Mass(cfg.mass_value),
                            cfg.quadrature};
  MicrocausalityResult res = microcausality_residual(req);
  Report report = make_report(cfg, "microcausality", bytes);
  report.results.push_back(
      ResultEntry::complex("noise_residual", res.residual));
  report.results.push_back(
      ResultEntry::complex("free_commutator", res.free_part));
  const double mag = std::abs(res.residual.value);
  const double err = res.residual.error_estimate;
  report.verdicts.push_back(
      {"microcausality",
       mag > 5.0 * err ? "violation_detected" : "consistent_with_zero"});
  return finish(report, opt, cfg, start);
}

int run_nr_leakage(const RunConfig& cfg, const CliOptions& opt,
                   const std::string& bytes) {
  const auto start = std::chrono::steady_clock::now();
  NrVerdict verdict =
      nr_sector_verdict(cfg.require_state(), cfg.noise, cfg.kappa,
                        cfg.time_horizon, cfg.probes, cfg.quadrature);
  Report report = make_report(cfg, "nr-leakage", bytes);
  IntegralResult ratio;
  ratio.value = verdict.ratio;
  ratio.converged = verdict.all_converged;
  report.results.push_back(ResultEntry::real("leakage_ratio", ratio));
  IntegralResult scale;
  scale.value = verdict.diagonal_scale;
  scale.converged = verdict.all_converged;
  report.results.push_back(ResultEntry::real("diagonal_scale", scale));
  SeriesEntry probes;
  probes.name = "leakage_probes";
  probes.columns = {"p_left", "p_right", "value_re", "value_im", "error"};
  for (const auto& row : verdict.probes) {
    probes.rows.push_back({row.p_left, row.p_right, row.value.real(),
                           row.value.imag(), row.error});
  }
  report.series.push_back(probes);
  report.verdicts.push_back(
      {"nr_sector", verdict.well_behaved ? "well_behaved" : "leaking"});
  return finish(report, opt, cfg, start);
}

int run_evolve(const RunConfig& cfg, const CliOptions& opt,
               const std::string& bytes) {
  const auto start = std::chrono::steady_clock::now();
  MomentumLattice lat(LatticeGrid{cfg.evolve.modes, cfg.evolve.spacing},
                      Mass(cfg.mass_value));
  LatticeDensityMatrix rho = lattice_two_packet(
      lat, cfg.evolve.center0, cfg.evolve.center1, cfg.evolve.sigma,
      cfg.evolve.relative_phase);
  const std::vector<int> blocks = sign_blocks(lat);
  QuadratureConfig qcfg = cfg.quadrature;
  qcfg.threads = 1;

  SeriesEntry history;
  history.name = "evolution_history";
  history.columns = {"step", "trace", "off_diagonal_norm", "min_eigenvalue"};
  history.rows.push_back({0.0, rho.trace(),
                          decoherence_observable(rho, blocks),
                          rho.min_eigenvalue()});
  bool warned = false;
  for (int s = 1; s <= cfg.evolve.steps; ++s) {
    StepResult step = step_first_order(rho, cfg.noise, cfg.gamma,
                                       cfg.evolve.step_time, qcfg);
    warned = warned || step.perturbativity_warning;
    rho = step.state;
    history.rows.push_back({static_cast<double>(s), rho.trace(),
                            decoherence_observable(rho, blocks),
                            step.min_eigenvalue});
  }
  Report report = make_report(cfg, "evolve", bytes);
  report.series.push_back(history);
  report.verdicts.push_back(
      {"perturbativity", warned ? "warning" : "ok"});
  return finish(report, opt, cfg, start);
}

int run_covariance(const RunConfig& cfg, const CliOptions& opt,
                   const std::string& bytes) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  std::vector<std::pair<SpacetimePoint, SpacetimePoint>> pairs;
  const double s = cfg.covariance.scale;
  for (int i = 0; i < cfg.covariance.pairs; ++i) {
    SpacetimePoint a{uniform(-s, s),
                     {uniform(-s, s), uniform(-s, s), uniform(-s, s)}};
    SpacetimePoint b{uniform(-s, s),
                     {uniform(-s, s), uniform(-s, s), uniform(-s, s)}};
    pairs.emplace_back(a, b);
  }
  std::vector<Boost> boosts;
  for (double eta : cfg.covariance.rapidities) {
    boosts.push_back(Boost{{eta, 0, 0}});
    boosts.push_back(Boost{{0, 0.6 * eta, 0.8 * eta}});
  }
  const double deviation = check_invariance(cfg.noise, pairs, boosts);
  Report report = make_report(cfg, "check-covariance", bytes);
  IntegralResult dev;
  dev.value = deviation;
  dev.converged = true;
  report.results.push_back(ResultEntry::real("max_boost_deviation", dev));
  report.verdicts.push_back(
      {"covariance",
       deviation < 1e-10 ? "invariant" : "frame_dependent"});
  return finish(report, opt, cfg, start);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Numerical diagnostics for noise-averaged collapse dynamics of a "
      "relativistic scalar field"};
  app.require_subcommand(1);

  CliOptions opt;
  const std::vector<std::string> verbs = {
      "energy-rate",   "scan-divergence",  "microcausality",
      "nr-leakage",    "evolve",           "check-covariance"};
  for (const auto& verb : verbs) {
    CLI::App* sub = app.add_subcommand(verb);
    sub->add_option("--config", opt.config_path, "JSON run configuration")
        ->required();
    sub->add_option("--output-dir", opt.output_dir, "artifact directory");
    sub->add_option("--seed-override", opt.seed_override,
                    "replace the config seed")
        ->each([&](const std::string&) { opt.has_seed_override = true; });
    sub->add_option("--threads", opt.threads,
                    "worker cap (results do not depend on it)");
  }
  CLI::App* emit = app.add_subcommand("emit-plot-data");
  emit->add_option("--report", opt.report_path, "existing JSON report")
      ->required();
  emit->add_option("--output-dir", opt.output_dir, "artifact directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    if (verb == "emit-plot-data") {
      const auto written = emit_plot_data(opt.report_path, opt.output_dir);
      for (const auto& p : written) std::cerr << "wrote " << p << "\n";
      return kExitOk;
    }
    std::string bytes = read_file(opt.config_path);
    RunConfig cfg = RunConfig::from_json_text(bytes, verb);
    if (opt.has_seed_override) {
      cfg.seed = opt.seed_override;
      cfg.quadrature.rng_seed = opt.seed_override;
    }
    cfg.quadrature.threads = std::max(1, opt.threads);

    if (verb == "energy-rate") return run_energy_rate(cfg, opt, bytes);
    if (verb == "scan-divergence") return run_scan(cfg, opt, bytes);
    if (verb == "microcausality") return run_microcausality(cfg, opt, bytes);
    if (verb == "nr-leakage") return run_nr_leakage(cfg, opt, bytes);
    if (verb == "evolve") return run_evolve(cfg, opt, bytes);
    if (verb == "check-covariance") return run_covariance(cfg, opt, bytes);
    std::cerr << "unknown subcommand: " << verb << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const WhiteNoiseNotPointwise& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
