#include "collapse/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace collapse {

namespace {

using nlohmann::json;

const std::set<std::string> kSubcommands = {
    "energy-rate",   "scan-divergence", "microcausality", "nr-leakage",
    "evolve",        "check-covariance"};

Vec3 parse_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw ValidationError(std::string(what) + " must be a 3-element array");
  Vec3 v{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  if (!v.finite())
    throw ValidationError(std::string(what) + " must be finite");
  return v;
}

NoiseCorrelator parse_noise(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "zero") return NoiseCorrelator::zero();
    if (type == "white")
      return NoiseCorrelator::white(j.at("strength").get<double>());
    if (type == "separable") {
      const json& sp = j.at("spatial");
      SpatialProfile spatial;
      const std::string sp_type = sp.at("type").get<std::string>();
      if (sp_type == "gaussian") {
        spatial = SpatialProfile::gaussian(sp.at("r_c").get<double>(),
                                           sp.value("m0", 1.0));
      } else if (sp_type == "tabulated") {
        spatial = SpatialProfile::tabulated(
            TabulatedProfile::from_csv(sp.at("csv").get<std::string>()),
            sp.value("momentum_space", false));
      } else {
        throw ValidationError("unknown spatial profile type: " + sp_type);
      }
      const json& tm = j.at("temporal");
      const std::string tm_type = tm.at("type").get<std::string>();
      TemporalKernel temporal;
      if (tm_type == "dirac") {
        temporal = TemporalKernel::dirac();
      } else if (tm_type == "exponential") {
        temporal = TemporalKernel::exponential(tm.at("omega_c").get<double>());
      } else if (tm_type == "gaussian") {
        temporal = TemporalKernel::gaussian(tm.at("tau_c").get<double>());
      } else {
        throw ValidationError("unknown temporal kernel type: " + tm_type);
      }
      return NoiseCorrelator::separable(spatial, temporal);
    }
    if (type == "invariant_gaussian")
      return NoiseCorrelator::invariant_gaussian(
          j.at("amplitude").get<double>(), j.at("scale").get<double>());
    if (type == "invariant_table")
      return NoiseCorrelator::invariant_table(
          TabulatedProfile::from_csv(j.at("csv").get<std::string>()));
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("invalid noise: ") + e.what());
  }
  throw ValidationError("unknown noise type: " + type);
}

std::optional<SingleParticleState> parse_state(const json& root, Mass m) {
  if (!root.contains("state")) return std::nullopt;
  const json& j = root.at("state");
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "gaussian_packet") {
      return SingleParticleState::gaussian_packet(
          parse_vec3(j.at("center"), "state.center"),
          j.at("sigma").get<double>(), m);
    }
    if (type == "two_packet") {
      return SingleParticleState::two_packet(
          parse_vec3(j.at("center0"), "state.center0"),
          parse_vec3(j.at("center1"), "state.center1"),
          j.at("sigma").get<double>(), j.value("relative_phase", 0.0), m);
    }
    if (type == "lattice") {
      return SingleParticleState::load_lattice(
          j.at("json").get<std::string>());
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("invalid state: ") + e.what());
  }
  throw ValidationError("unknown state type: " + type);
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path,
                               const std::string& cli_subcommand) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text, cli_subcommand);
}

RunConfig RunConfig::from_json_text(const std::string& text,
                                    const std::string& cli_subcommand) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") +
                          e.what());
  }
  RunConfig cfg;
  try {
    if (j.value("schema", 1) != 1)
      throw ValidationError("unsupported config schema version");
    cfg.schema = 1;
    cfg.subcommand = j.value("subcommand", "");
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.mass_value = j.value("mass", 1.0);
    if (!(cfg.mass_value > 0.0))
      throw ValidationError("mass must be positive");
    cfg.gamma = j.value("gamma", 1e-2);
    cfg.time_horizon = j.value("time_horizon", 1.0);
    cfg.kappa = j.value("kappa", 0.1);
    cfg.noise = j.contains("noise") ? parse_noise(j.at("noise"))
                                    : NoiseCorrelator::zero();
    cfg.state = parse_state(j, Mass(cfg.mass_value));
    if (j.contains("quadrature")) {
      const json& q = j.at("quadrature");
      cfg.quadrature.abs_tol = q.value("abs_tol", cfg.quadrature.abs_tol);
      cfg.quadrature.rel_tol = q.value("rel_tol", cfg.quadrature.rel_tol);
      cfg.quadrature.max_subdivisions =
          q.value("max_subdivisions", cfg.quadrature.max_subdivisions);
      cfg.quadrature.momentum_cutoff =
          q.value("momentum_cutoff", cfg.quadrature.momentum_cutoff);
      cfg.quadrature.mc_samples =
          q.value("mc_samples", cfg.quadrature.mc_samples);
      cfg.quadrature.taper_fraction =
          q.value("taper_fraction", cfg.quadrature.taper_fraction);
      cfg.quadrature.plateau_rel_tol =
          q.value("plateau_rel_tol", cfg.quadrature.plateau_rel_tol);
      cfg.quadrature.divergence_ratio =
          q.value("divergence_ratio", cfg.quadrature.divergence_ratio);
    }
    cfg.quadrature.rng_seed = cfg.seed;
    cfg.cutoffs = j.value("cutoffs", std::vector<double>{});
    if (j.contains("separation"))
      cfg.separation = parse_vec3(j.at("separation"), "separation");
    if (j.contains("probes")) {
      const json& p = j.at("probes");
      cfg.probes.count = p.value("count", cfg.probes.count);
      cfg.probes.min_factor = p.value("min_factor", cfg.probes.min_factor);
      cfg.probes.max_factor = p.value("max_factor", cfg.probes.max_factor);
    }
    if (j.contains("evolve")) {
      const json& e = j.at("evolve");
      cfg.evolve.modes = e.value("modes", cfg.evolve.modes);
      cfg.evolve.spacing = e.value("spacing", cfg.evolve.spacing);
      cfg.evolve.steps = e.value("steps", cfg.evolve.steps);
      if (e.contains("centers")) {
        const json& c = e.at("centers");
        if (!c.is_array() || c.size() != 2)
          throw ValidationError("evolve.centers must have two entries");
        cfg.evolve.center0 = c[0].get<double>();
        cfg.evolve.center1 = c[1].get<double>();
      }
      cfg.evolve.sigma = e.value("sigma", cfg.evolve.sigma);
      cfg.evolve.relative_phase =
          e.value("relative_phase", cfg.evolve.relative_phase);
      cfg.evolve.step_time = e.value("step_time", cfg.evolve.step_time);
    }
    if (j.contains("covariance")) {
      const json& c = j.at("covariance");
      cfg.covariance.pairs = c.value("pairs", cfg.covariance.pairs);
      cfg.covariance.rapidities =
          c.value("rapidities", cfg.covariance.rapidities);
      cfg.covariance.scale = c.value("scale", cfg.covariance.scale);
    }
    if (j.contains("output"))
      cfg.output_stem = j.at("output").value("stem", cfg.output_stem);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("invalid config: ") + e.what());
  }

  // canonical echo with the effective values
  json echo = j;
  echo["schema"] = 1;
  echo["seed"] = cfg.seed;
  cfg.raw_json = echo.dump();

  cfg.validate(cli_subcommand);
  return cfg;
}

void RunConfig::validate(const std::string& cli_subcommand) const {
  if (!kSubcommands.count(cli_subcommand))
    throw ValidationError("unknown subcommand: " + cli_subcommand);
  if (!subcommand.empty() && subcommand != cli_subcommand)
    throw ValidationError("config subcommand '" + subcommand +
                          "' does not match the requested '" +
                          cli_subcommand + "'");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  if (!(time_horizon >= 0.0))
    throw ValidationError("time_horizon must be >= 0");
  if (!(kappa > 0.0)) throw ValidationError("kappa must be positive");
  try {
    quadrature.validate();
  } catch (const std::exception& e) {
    throw ValidationError(e.what());
  }

  const bool needs_state = cli_subcommand == "energy-rate" ||
                           cli_subcommand == "scan-divergence" ||
                           cli_subcommand == "nr-leakage";
  if (needs_state && !state)
    throw ValidationError(cli_subcommand + " requires a state section");
  if (state) {
    try {
      state->ensure_normalized();
    } catch (const std::exception& e) {
      throw ValidationError(e.what());
    }
  }
  if (cli_subcommand == "energy-rate" || cli_subcommand == "scan-divergence" ||
      cli_subcommand == "microcausality" || cli_subcommand == "nr-leakage") {
    if (!(time_horizon > 0.0))
      throw ValidationError("time_horizon must be positive");
    if (noise.is_zero() && cli_subcommand != "microcausality")
      throw ValidationError(cli_subcommand + " requires a noise section");
  }
  if (cli_subcommand == "scan-divergence") {
    if (cutoffs.size() < 4)
      throw ValidationError("scan-divergence needs at least 4 cutoffs");
    for (std::size_t i = 0; i + 1 < cutoffs.size(); ++i) {
      if (!(cutoffs[i] < cutoffs[i + 1]))
        throw ValidationError("cutoffs must be strictly increasing");
    }
  }
  if (cli_subcommand == "check-covariance" && !noise.pointwise())
    throw ValidationError(
        "white noise is distribution valued; the covariance check needs a "
        "pointwise correlator");
  if (cli_subcommand == "nr-leakage") {
    if (state->kind() == SingleParticleState::Kind::lattice)
      throw ValidationError(
          "nr-leakage probes momenta off the grid axis; use a packet state");
    if (!state->is_nonrelativistic(kappa).nonrelativistic)
      throw ValidationError(
          "nr-leakage requires a state that is non-relativistic at the "
          "configured kappa");
  }
  if (cli_subcommand == "evolve") {
    if (evolve.modes < 2 || !(evolve.spacing > 0.0) || evolve.steps < 1 ||
        !(evolve.sigma > 0.0) || !(evolve.step_time > 0.0))
      throw ValidationError("invalid evolve parameters");
    if (noise.is_zero())
      throw ValidationError("evolve requires a noise section");
  }
  if (cli_subcommand == "check-covariance") {
    if (covariance.pairs < 1 || !(covariance.scale > 0.0) ||
        covariance.rapidities.empty())
      throw ValidationError("invalid covariance parameters");
  }
}

}  // namespace collapse
