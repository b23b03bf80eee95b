#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace collapse {

/// Tolerances, truncation and sampling budget shared by all integration
/// routines. Every result is a deterministic function of the integrand and
/// of this configuration (Monte Carlo included, via rng_seed).
struct QuadratureConfig {
  double abs_tol = 1e-14;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
  /// Hard momentum truncation for radial momentum integrals (units of mass).
  double momentum_cutoff = 40.0;
  long mc_samples = 200000;
  std::uint64_t rng_seed = 0x6b776f6e736565ULL;
  /// Fraction of the momentum cutoff over which a smooth cos^2 window rolls
  /// the integrand to zero. Zero means a sharp cutoff (needed when comparing
  /// against Monte Carlo over the same ball).
  double taper_fraction = 0.25;
  /// Cutoff-scan classification thresholds.
  double plateau_rel_tol = 0.01;
  double divergence_ratio = 1.2;
  int threads = 1;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
      throw std::invalid_argument("quadrature tolerances must be positive");
    if (max_subdivisions < 1)
      throw std::invalid_argument("max_subdivisions must be >= 1");
    if (!(momentum_cutoff > 0.0))
      throw std::invalid_argument("momentum_cutoff must be positive");
    if (mc_samples < 1)
      throw std::invalid_argument("mc_samples must be >= 1");
    if (taper_fraction < 0.0 || taper_fraction >= 1.0)
      throw std::invalid_argument("taper_fraction must lie in [0, 1)");
    if (!(plateau_rel_tol > 0.0) || !(divergence_ratio > 1.0))
      throw std::invalid_argument("invalid scan thresholds");
  }
};

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  long evaluations = 0;
};

struct ComplexIntegralResult {
  std::complex<double> value{0.0, 0.0};
  double error_estimate = 0.0;
  bool converged = false;
  long evaluations = 0;
};

/// Adaptive Gauss-Kronrod integration on [a, b]. Deterministic: the
/// subdivision order depends only on the integrand and the configuration.
IntegralResult integrate_adaptive(const std::function<double(double)>& f,
                                  double a, double b,
                                  const QuadratureConfig& cfg);
ComplexIntegralResult integrate_adaptive_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    const QuadratureConfig& cfg);

/// Adaptive integration over [0, cfg.momentum_cutoff].
IntegralResult integrate_radial(const std::function<double(double)>& f,
                                const QuadratureConfig& cfg);

/// Adaptive integration with interior break points inserted at the given
/// abscissae (used to resolve narrow structures the subdivision heuristic
/// would otherwise have to hunt for).
IntegralResult integrate_segmented(const std::function<double(double)>& f,
                                   double a, double b,
                                   const std::vector<double>& breaks,
                                   const QuadratureConfig& cfg);

/// Oscillatory integration: the interval is pre-split into panels no wider
/// than half an oscillation of the supplied phase rate, then each panel is
/// integrated adaptively.
ComplexIntegralResult integrate_oscillatory(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double phase_rate, const QuadratureConfig& cfg);

/// Angular average of a plane wave over the sphere:
/// (1/4pi) \int dOmega e^{i k.r} = sin(kr)/(kr), with the r -> 0 limit
/// evaluated by series below kr = 1e-4.
double spherical_phase_average(double k_mag, double r_mag);

/// View of a temporal kernel h(u) (or of a fixed-q noise spectrum
/// D~(q, u)): an optional Dirac spike at u = 0 plus an optional smooth part.
/// The smooth part carries a shape tag so that closed forms can be used
/// where they exist.
struct TimeKernel {
  enum class Shape { none, exponential, gaussian, generic };

  double dirac_weight = 0.0;  // coefficient of delta(u)
  Shape shape = Shape::none;
  double coeff = 0.0;  // exponential: coeff*exp(-rate*u); gaussian: coeff*exp(-u^2/(2 width^2))
  double rate = 0.0;
  double width = 0.0;
  std::function<double(double)> fn;  // generic smooth part

  bool has_smooth() const { return shape != Shape::none; }
  double smooth(double u) const;
  TimeKernel scaled(double s) const;
  static TimeKernel zero() { return {}; }
  static TimeKernel dirac(double weight) {
    TimeKernel k;
    k.dirac_weight = weight;
    return k;
  }
};

/// Collapsed double time integral
///   \int_0^t ds \int_0^s dtau h(s - tau) cos(dE (s - tau))
/// = \int_0^t du (t - u) h(u) cos(dE u).
/// A Dirac component sits on the boundary of the nested domain and is
/// assigned weight 1/2 (limit of symmetric narrowing kernels), so a pure
/// delta of weight w contributes w t / 2.
IntegralResult reduce_double_time(const TimeKernel& h, double dE, double t,
                                  const QuadratureConfig& cfg);

/// Two-phase variant of the collapsed double time integral:
///   \int_0^t ds \int_0^s dtau h(s - tau) e^{i alpha s} e^{-i beta tau}
/// = \int_0^t du h(u) e^{i alpha u} PhaseRamp(t - u, alpha - beta)
/// with PhaseRamp(T, w) = (e^{i w T} - 1)/(i w).
ComplexIntegralResult double_time_phase(const TimeKernel& h, double alpha,
                                        double beta, double t,
                                        const QuadratureConfig& cfg);

/// (e^{i w T} - 1) / (i w), stable for small |w T|.
std::complex<double> phase_ramp(double T, double w);

/// Seeded plain Monte Carlo over an axis-aligned box in up to 7 dimensions.
/// Identical configuration (seed included) gives bitwise identical output.
struct McResult {
  std::complex<double> value{0.0, 0.0};
  double stderr_re = 0.0;
  double stderr_im = 0.0;
  long evaluations = 0;
};
McResult mc_integrate(
    const std::function<std::complex<double>(const double*)>& f,
    const std::vector<double>& lo, const std::vector<double>& hi,
    const QuadratureConfig& cfg);

enum class ScanVerdict { plateau, diverging, inconclusive };
const char* to_string(ScanVerdict v);

struct ScanPoint {
  double cutoff = 0.0;
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

struct CutoffScan {
  std::vector<ScanPoint> points;
  ScanVerdict verdict = ScanVerdict::inconclusive;
  bool all_converged = false;
};

/// Evaluates a cutoff-indexed family at each (strictly increasing, >= 4)
/// cutoff and classifies the series as plateau / diverging / inconclusive.
CutoffScan cutoff_scan(const std::function<IntegralResult(double)>& family,
                       const std::vector<double>& cutoffs,
                       const QuadratureConfig& cfg);

/// Deterministic helper: runs fn(i) for i in [0, n) on up to `threads`
/// workers with a static partition. Results must be written to
/// caller-preallocated slots so the outcome is independent of scheduling.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

}  // namespace collapse
