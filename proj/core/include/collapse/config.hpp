#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "collapse/diagnostics.hpp"
#include "collapse/noise.hpp"
#include "collapse/states.hpp"

namespace collapse {

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Lattice evolution parameters (config section "evolve").
struct EvolveParams {
  int modes = 32;
  double spacing = 0.0625;
  int steps = 10;
  double center0 = -0.5;
  double center1 = 0.5;
  double sigma = 0.08;
  double relative_phase = 0.0;
  double step_time = 0.5;
};

/// Covariance sampling parameters (config section "covariance").
struct CovarianceParams {
  int pairs = 24;
  std::vector<double> rapidities = {0.5};
  double scale = 1.0;
};

/// Parsed and validated run configuration. Cross-field consistency is
/// checked up front, before any computation starts.
struct RunConfig {
  int schema = 1;
  std::string subcommand;  // optional in the file; must match the CLI verb
  std::uint64_t seed = 1;
  double mass_value = 1.0;
  double gamma = 1e-2;
  double time_horizon = 1.0;
  double kappa = 0.1;
  NoiseCorrelator noise;
  std::optional<SingleParticleState> state;
  QuadratureConfig quadrature;
  std::vector<double> cutoffs;
  Vec3 separation{3.0, 0.0, 0.0};
  NrProbeGrid probes;
  EvolveParams evolve;
  CovarianceParams covariance;
  std::string output_stem = "run";
  std::string raw_json;  // canonicalized configuration (request echo)

  /// Parses a configuration file. Throws ValidationError on malformed or
  /// inconsistent input.
  static RunConfig from_file(const std::string& path,
                             const std::string& cli_subcommand);
  static RunConfig from_json_text(const std::string& text,
                                  const std::string& cli_subcommand);

  const SingleParticleState& require_state() const {
    if (!state) throw ValidationError("this subcommand requires a state");
    return *state;
  }

  void validate(const std::string& cli_subcommand) const;
};

}  // namespace collapse
