#pragma once

#include <complex>
#include <vector>

#include "collapse/kinematics.hpp"
#include "collapse/noise.hpp"
#include "collapse/quadrature.hpp"
#include "collapse/states.hpp"

namespace collapse {

// ---------------------------------------------------------------------------
// Energy rate

struct EnergyRateRequest {
  SingleParticleState state;
  NoiseCorrelator noise;
  double gamma = 1.0;
  double t = 1.0;
  QuadratureConfig cfg;

  void validate() const;
};

/// Energy moment of the noise generator at coupling 1,
///   -(m^2/(2 pi)^3) \int dq \int dp \int_0^t du (t-u) D~(q,u)
///       cos(dE(p,q) u) A(p,p) (1/(2 E_{p-q}) - 1/(2 E_p)),
/// truncated at cfg.momentum_cutoff. The physical first-order rate is gamma
/// times this. States with an isotropic diagonal are reduced to a
/// (p, q, angle) integral; anisotropic states fall back to seeded Monte
/// Carlo.
IntegralResult energy_rate(const EnergyRateRequest& req);

/// Cutoff scan of energy_rate over the given momentum cutoffs.
CutoffScan energy_rate_scan(const EnergyRateRequest& req,
                            const std::vector<double>& cutoffs);

// ---------------------------------------------------------------------------
// Field two-point building blocks (radial reductions, smooth cutoff window)

/// g1(r, s) = (1/(2 pi)^3) \int d^3k / (2 E_k) e^{i k.r - i E_k s}
///          = (1/(2 pi^2)) \int_0^L dk w(k) k^2/(2 E_k) sinc(k r) e^{-i E_k s}.
/// The reported error includes a truncation estimate from re-evaluation at
/// 0.9 L.
ComplexIntegralResult wightman_g1(double r, double s, Mass m,
                                  const QuadratureConfig& cfg);

/// Same with measure 1/(4 E_k^2).
ComplexIntegralResult g2(double r, double s, Mass m,
                         const QuadratureConfig& cfg);

/// F(dz, x, t, tau) = g1(|dz - x|, t - tau) * g2(|x|, tau); the exact
/// factorization of the 6D double momentum integral.
ComplexIntegralResult f_function(const Vec3& dz, const Vec3& x, double t,
                                 double tau, Mass m,
                                 const QuadratureConfig& cfg);

/// Free-field commutator [phi(z1, t), phi(z2, 0)] = 2 i Im g1(|dz|, t);
/// vanishes for space-like arguments.
ComplexIntegralResult free_commutator(const Vec3& dz, double t, Mass m,
                                      const QuadratureConfig& cfg);

// ---------------------------------------------------------------------------
// Microcausality

struct MicrocausalityRequest {
  Vec3 z1;  // spatial position of the operator evolved to time t
  Vec3 z2;  // spatial position of the operator at time 0
  double t = 1.0;
  NoiseCorrelator noise;
  double gamma = 1.0;
  Mass mass;
  QuadratureConfig cfg;

  void validate() const;
};

struct MicrocausalityResult {
  ComplexIntegralResult residual;   // noise-induced term, order gamma
  ComplexIntegralResult free_part;  // free-field commutator, reported separately
};

/// First-order noise contribution to the commutator of the evolved field
/// with a field at time 0:
///   residual = 2 i gamma m^2 \int_0^t dtau (t - tau) \int d^3x D(x, tau)
///                Im[ g1(|dz - x|, t - tau) g2(|x|, tau) ],
/// with the delta-correlator branch
///   residual = i gamma m^2 strength t Im[ g1(|dz|, t) g2(0, 0) ].
/// Purely imaginary; the error bar combines quadrature estimates with a
/// multi-cutoff truncation spread.
MicrocausalityResult microcausality_residual(const MicrocausalityRequest& req);

// ---------------------------------------------------------------------------
// Non-relativistic sector

struct NrLeakage {
  ComplexIntegralResult element;    // full generator matrix element
  ComplexIntegralResult transport;  // momentum-transport (shifted-kernel) part
};

/// Generator matrix element <p_L| L_t[rho] |p_R> for momenta on the z axis,
///   -(m^2/4) \int dq { A(p_L,p_R) [...] - A(p_R - q, p_L - q) [...] },
/// with the collapsed double time integral applied to each phase product.
NrLeakage nr_leakage(const SingleParticleState& state,
                     const NoiseCorrelator& noise, const Vec3& p_left,
                     const Vec3& p_right, double t,
                     const QuadratureConfig& cfg);

struct NrProbeGrid {
  int count = 12;
  double min_factor = 1.2;
  double max_factor = 10.0;
};

struct NrProbeRow {
  double p_left = 0.0;
  double p_right = 0.0;
  std::complex<double> value;
  double error = 0.0;
};

struct NrVerdict {
  bool well_behaved = false;
  double max_leakage = 0.0;
  double diagonal_scale = 0.0;
  double ratio = 0.0;
  bool all_converged = true;
  std::vector<NrProbeRow> probes;
};

/// Max |nr_leakage| over relativistic probe pairs (both diagonal (p, p) and
/// mixed (p, 0), p in [min_factor, max_factor] * kappa m, log spaced)
/// against the momentum-transport scale on non-relativistic diagonal
/// probes. The transport part is used as the reference scale because the
/// dephasing part of a broadband correlator grows with the momentum cutoff
/// and would mask the leakage signal. Verdict: well behaved iff the ratio
/// stays below 1e-3.
NrVerdict nr_sector_verdict(const SingleParticleState& state,
                            const NoiseCorrelator& noise, double kappa,
                            double t, const NrProbeGrid& grid,
                            const QuadratureConfig& cfg);

/// Two-particle matrix element of the generator on a one-particle state.
/// The generator conserves particle number (every term pairs one creation
/// with one annihilation operator), so the element vanishes identically; no
/// quadrature is involved.
std::complex<double> particle_creation_element(
    const SingleParticleState& state, const NoiseCorrelator& noise,
    const std::vector<Vec3>& two_particle_probes, double t);

}  // namespace collapse
