#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "collapse/kinematics.hpp"
#include "collapse/quadrature.hpp"

namespace collapse {

/// Thrown when a distribution-valued (white) correlator is queried
/// pointwise.
class WhiteNoiseNotPointwise : public std::domain_error {
 public:
  WhiteNoiseNotPointwise()
      : std::domain_error(
            "white noise is delta-correlated and cannot be evaluated "
            "pointwise") {}
};

/// Spatial Fourier component of a correlator at fixed time argument:
/// D~(|q|, u) = delta_weight * delta(u) + value.
struct SpectralValue {
  double delta_weight = 0.0;
  double value = 0.0;
  bool converged = true;
};

/// Two-column table with strictly increasing abscissa, linear
/// interpolation inside the range and zero extrapolation outside.
class TabulatedProfile {
 public:
  TabulatedProfile() = default;
  TabulatedProfile(std::vector<double> x, std::vector<double> v);
  static TabulatedProfile from_csv(const std::string& path);

  double operator()(double x) const;
  double max_abscissa() const { return x_.empty() ? 0.0 : x_.back(); }
  double min_abscissa() const { return x_.empty() ? 0.0 : x_.front(); }
  bool empty() const { return x_.empty(); }
  const std::vector<double>& abscissae() const { return x_; }
  const std::vector<double>& values() const { return v_; }

 private:
  std::vector<double> x_;
  std::vector<double> v_;
};

/// Radial spatial factor g(|x|) of a separable correlator.
struct SpatialProfile {
  enum class Kind { gaussian, tabulated_radius, tabulated_momentum };

  Kind kind = Kind::gaussian;
  double r_c = 1.0;  // localization length
  double m0 = 1.0;   // reference mass entering the overall normalization
  TabulatedProfile table;

  /// g(r): Gaussian form exp(-r^2 / (2 r_c^2)) / (m0^2 (4 pi r_c^2)^{3/2}).
  double value(double r, const QuadratureConfig& cfg) const;
  /// 3D Fourier transform g~(q) = \int d^3x e^{-i q.x} g(|x|).
  double fourier(double q, const QuadratureConfig& cfg, bool* ok = nullptr) const;
  double fourier_peak(const QuadratureConfig& cfg) const;

  static SpatialProfile gaussian(double r_c, double m0);
  static SpatialProfile tabulated(TabulatedProfile t, bool momentum_space);
};

/// Symmetric temporal factor h(u); the Dirac variant recovers the
/// delta-correlated-in-time model. Smooth variants are normalized to unit
/// time integral so that they reduce to the Dirac variant in the narrow
/// limit.
struct TemporalKernel {
  enum class Kind { dirac, exponential, gaussian };

  Kind kind = Kind::dirac;
  double omega_c = 1.0;  // exponential: h(u) = (omega_c/2) e^{-omega_c |u|}
  double tau_c = 1.0;    // gaussian: h(u) = e^{-u^2/(2 tau_c^2)} / (tau_c sqrt(2 pi))

  double value(double u) const;
  TimeKernel kernel() const;

  static TemporalKernel dirac();
  static TemporalKernel exponential(double omega_c);
  static TemporalKernel gaussian(double tau_c);
};

/// Two-point noise correlator D. Four families:
///  - zero: no noise (unitary dynamics);
///  - white: strength * delta^4(x - y), a tagged distribution that is never
///    sampled pointwise -- every consumer has an explicit delta branch;
///  - separable: g(|x|) h(tau), frame-fixed (not boost invariant);
///  - invariant_radial: a function of the squared invariant interval
///    s2 = tau^2 - |x|^2, boost invariant by construction.
class NoiseCorrelator {
 public:
  enum class Kind { zero, white, separable, invariant_radial };

  static NoiseCorrelator zero();
  static NoiseCorrelator white(double strength);
  static NoiseCorrelator separable(SpatialProfile spatial,
                                   TemporalKernel temporal);
  /// amplitude * exp(-(s2 / scale^2)^2)
  static NoiseCorrelator invariant_gaussian(double amplitude, double scale);
  /// Tabulated over s2 (linear interpolation, zero outside the table).
  static NoiseCorrelator invariant_table(TabulatedProfile over_s2);

  Kind kind() const { return kind_; }
  bool pointwise() const { return kind_ != Kind::white; }
  bool is_zero() const { return kind_ == Kind::zero; }
  double strength() const { return strength_; }
  const SpatialProfile& spatial() const { return spatial_; }
  const TemporalKernel& temporal() const { return temporal_; }

  /// D(x, tau); throws WhiteNoiseNotPointwise for the white family.
  double value(const Vec3& x, double tau) const;

  /// D~(|q|, u) (spatial Fourier transform at fixed time argument).
  SpectralValue fourier_qt(double q_mag, double u,
                           const QuadratureConfig& cfg) const;

  /// D~(|q|, .) packaged as a time kernel for the collapsed double time
  /// integrals. White noise maps to a Dirac kernel of weight
  /// (2 pi)^3 * strength.
  TimeKernel spectral_kernel(double q_mag, const QuadratureConfig& cfg) const;

  /// Smallest L such that sup_u |D~(q, u)| < eps * sup_{q,u} |D~| for all
  /// q > L. Returns +infinity for white noise (flat spectrum).
  double momentum_support_bound(double eps, const QuadratureConfig& cfg) const;

  /// Abscissae at which radial q integrals should be split to resolve the
  /// spectral support of this correlator.
  std::vector<double> spectral_breakpoints(const QuadratureConfig& cfg) const;

 private:
  Kind kind_ = Kind::zero;
  double strength_ = 0.0;
  SpatialProfile spatial_;
  TemporalKernel temporal_;
  double inv_amplitude_ = 0.0;
  double inv_scale_ = 1.0;
  TabulatedProfile inv_table_;
  bool inv_tabulated_ = false;

  double invariant_value(double s2) const;
};

/// Max over sample pairs and boosts of |D(Lx, Ly) - D(x, y)|.
/// Invariant-radial correlators stay below round-off; separable ones
/// generically report a strictly positive frame dependence.
double check_invariance(
    const NoiseCorrelator& n,
    const std::vector<std::pair<SpacetimePoint, SpacetimePoint>>& pairs,
    const std::vector<Boost>& boosts);

}  // namespace collapse
