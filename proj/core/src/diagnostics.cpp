#include "collapse/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace collapse {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvTwoPiSq = 1.0 / (2.0 * std::numbers::pi * std::numbers::pi);
using cplx = std::complex<double>;

// Smooth cos^2 roll-off over the last taper_fraction of the cutoff; kills
// the non-decaying endpoint oscillation of the radial momentum integrals.
double taper_window(double k, double cutoff, double frac) {
  if (frac <= 0.0) return 1.0;
  const double k0 = cutoff * (1.0 - frac);
  if (k <= k0) return 1.0;
  if (k >= cutoff) return 0.0;
  const double u = (k - k0) / (cutoff - k0);
  const double c = std::cos(0.5 * std::numbers::pi * u);
  return c * c;
}

// (1/(2 pi^2)) \int_0^L w(k) k^2 measure(E) sinc(k r) e^{-i E s} dk
// measure_pow = 1 -> 1/(2E); measure_pow = 2 -> 1/(4E^2)
ComplexIntegralResult radial_phase_integral(int measure_pow, double r,
                                            double s, double m, double cutoff,
                                            const QuadratureConfig& cfg) {
  auto f = [&](double k) -> cplx {
    const double e = std::sqrt(m * m + k * k);
    const double meas = (measure_pow == 1) ? 1.0 / (2.0 * e)
                                           : 1.0 / (4.0 * e * e);
    const double amp = taper_window(k, cutoff, cfg.taper_fraction) * k * k *
                       meas * spherical_phase_average(k, r);
    return std::polar(amp, -e * s);
  };
  const double rate = r + std::abs(s);
  ComplexIntegralResult res =
      integrate_oscillatory(f, 0.0, cutoff, rate, cfg);
  res.value *= kInvTwoPiSq;
  res.error_estimate *= kInvTwoPiSq;
  return res;
}

// Exact angular average of g1 over the sphere of relative directions:
// \int_{-1}^{1} dmu g1(sqrt(a^2 + b^2 - 2 a b mu), s)
//   = (1/(2 pi^2)) \int dk w(k) k^2 sinc(k a) sinc(k b) e^{-i E s} / E.
ComplexIntegralResult double_sinc_integral(double a, double b, double s,
                                           double m, double cutoff,
                                           const QuadratureConfig& cfg) {
  auto f = [&](double k) -> cplx {
    const double e = std::sqrt(m * m + k * k);
    const double amp = taper_window(k, cutoff, cfg.taper_fraction) * k * k *
                       spherical_phase_average(k, a) *
                       spherical_phase_average(k, b) / e;
    return std::polar(amp, -e * s);
  };
  const double rate = a + b + std::abs(s);
  ComplexIntegralResult res =
      integrate_oscillatory(f, 0.0, cutoff, rate, cfg);
  res.value *= kInvTwoPiSq;
  res.error_estimate *= kInvTwoPiSq;
  return res;
}

const double kCutoffLadder[3] = {0.78, 0.9, 1.0};

}  // namespace

// ---------------------------------------------------------------------------
// Energy rate

void EnergyRateRequest::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(t > 0.0)) throw std::invalid_argument("horizon t must be positive");
  cfg.validate();
  state.ensure_normalized();
}

namespace {

// The angular part of the energy moment at fixed (p, q). Stable forms:
//   E_w = sqrt(m^2 + p^2 + q^2 - 2 p q mu),
//   dE  = q (q - 2 p mu) / (E_w + E_p),
//   1/(2 E_w) - 1/(2 E_p) = -q (q - 2 p mu) / (2 E_w E_p (E_w + E_p)).
struct EnergyAngularIntegrand {
  double p, q, m, ep, t;
  const TimeKernel* base_kernel;  // per-q kernel (already scaled)
  const QuadratureConfig* cfg;

  double operator()(double mu) const {
    const double w2 = p * p + q * q - 2.0 * p * q * mu;
    const double ew = std::sqrt(m * m + w2);
    const double qq = q * (q - 2.0 * p * mu);
    const double de = qq / (ew + ep);
    const double bracket = -qq / (2.0 * ew * ep * (ew + ep));
    const double theta =
        reduce_double_time(*base_kernel, de, t, *cfg).value;
    return bracket * theta;
  }
};

IntegralResult energy_rate_isotropic(const EnergyRateRequest& req,
                                     double cutoff) {
  const double m = req.state.mass().value();
  const double p_hi = req.state.diagonal_support_radius();
  QuadratureConfig cfg = req.cfg;
  QuadratureConfig inner = cfg;
  inner.rel_tol = cfg.rel_tol * 0.1;
  inner.abs_tol = cfg.abs_tol * 0.1;

  const std::vector<double> q_breaks = req.noise.spectral_breakpoints(cfg);
  const bool pure_delta = [&] {
    TimeKernel k = req.noise.spectral_kernel(0.0, cfg);
    return !k.has_smooth();
  }();

  long evals = 0;
  auto q_integral = [&](double p) {
    const double ep = std::sqrt(m * m + p * p);
    auto fq = [&](double q) {
      const TimeKernel kernel = req.noise.spectral_kernel(q, inner);
      if (pure_delta) {
        // delta kernel: the time factor is angle independent and the
        // angular integral closes:
        //   int dmu / (2 E_w) = 2 / (E_plus + E_minus).
        const double epl = std::sqrt(m * m + (p + q) * (p + q));
        const double emi = std::sqrt(m * m + (p - q) * (p - q));
        const double ang = 2.0 / (epl + emi) - 1.0 / ep;
        const double theta = 0.5 * kernel.dirac_weight * req.t;
        evals += 1;
        return q * q * ang * theta;
      }
      EnergyAngularIntegrand fi{p, q, m, ep, req.t, &kernel, &inner};
      IntegralResult r = integrate_adaptive(
          [&](double mu) { return fi(mu); }, -1.0, 1.0, inner);
      evals += r.evaluations;
      return q * q * r.value;
    };
    IntegralResult rq = integrate_segmented(fq, 0.0, cutoff, q_breaks, inner);
    evals += rq.evaluations;
    return rq.value;
  };

  std::vector<double> p_breaks;
  for (double f : {0.25, 0.5, 0.75}) p_breaks.push_back(p_hi * f);
  auto fp = [&](double p) {
    return p * p * req.state.diagonal_radial(p) * q_integral(p);
  };
  IntegralResult rp = integrate_segmented(fp, 0.0, p_hi, p_breaks, cfg);
  IntegralResult out;
  const double pref = -m * m / std::numbers::pi;
  out.value = pref * rp.value;
  out.error_estimate = std::abs(pref) * rp.error_estimate;
  out.converged = rp.converged;
  out.evaluations = rp.evaluations + evals;
  return out;
}

IntegralResult energy_rate_mc(const EnergyRateRequest& req, double cutoff) {
  const double m = req.state.mass().value();
  const Mass mass = req.state.mass();
  const double reach = req.state.diagonal_support_radius();
  Vec3 c = req.state.center(0);
  Vec3 c1 = req.state.kind() == SingleParticleState::Kind::two_packet
                ? req.state.center(1)
                : c;
  const Vec3 lo_c{std::min(c.x, c1.x) - reach, std::min(c.y, c1.y) - reach,
                  std::min(c.z, c1.z) - reach};
  const Vec3 hi_c{std::max(c.x, c1.x) + reach, std::max(c.y, c1.y) + reach,
                  std::max(c.z, c1.z) + reach};
  std::vector<double> lo{lo_c.x, lo_c.y, lo_c.z, -cutoff, -cutoff, -cutoff};
  std::vector<double> hi{hi_c.x, hi_c.y, hi_c.z, cutoff, cutoff, cutoff};
  QuadratureConfig inner = req.cfg;
  auto f = [&](const double* x) -> cplx {
    const Vec3 p{x[0], x[1], x[2]};
    const Vec3 q{x[3], x[4], x[5]};
    if (q.norm2() > cutoff * cutoff) return {0.0, 0.0};
    const double a = req.state.amplitude(p, p).real();
    if (a == 0.0) return {0.0, 0.0};
    const double ep = energy(p, mass);
    const double ew = energy(p - q, mass);
    const double de = ew - ep;
    const TimeKernel kernel = req.noise.spectral_kernel(q.norm(), inner);
    const double theta = reduce_double_time(kernel, de, req.t, inner).value;
    const double bracket = 0.5 / ew - 0.5 / ep;
    return {a * bracket * theta, 0.0};
  };
  McResult mc = mc_integrate(f, lo, hi, req.cfg);
  IntegralResult out;
  const double pref = -m * m / std::pow(kTwoPi, 3);
  out.value = pref * mc.value.real();
  out.error_estimate = std::abs(pref) * mc.stderr_re;
  out.converged = true;  // Monte Carlo always reports its error bar
  out.evaluations = mc.evaluations;
  return out;
}

IntegralResult energy_rate_at(const EnergyRateRequest& req, double cutoff) {
  if (req.noise.is_zero()) {
    IntegralResult zero;
    zero.converged = true;
    return zero;
  }
  if (req.state.isotropic_diagonal())
    return energy_rate_isotropic(req, cutoff);
  return energy_rate_mc(req, cutoff);
}

}  // namespace

IntegralResult energy_rate(const EnergyRateRequest& req) {
  req.validate();
  return energy_rate_at(req, req.cfg.momentum_cutoff);
}

CutoffScan energy_rate_scan(const EnergyRateRequest& req,
                            const std::vector<double>& cutoffs) {
  req.validate();
  return cutoff_scan(
      [&](double cutoff) { return energy_rate_at(req, cutoff); }, cutoffs,
      req.cfg);
}

// ---------------------------------------------------------------------------
// Two-point building blocks

ComplexIntegralResult wightman_g1(double r, double s, Mass m,
                                  const QuadratureConfig& cfg) {
  if (r < 0.0) throw std::invalid_argument("wightman_g1 needs r >= 0");
  ComplexIntegralResult full = radial_phase_integral(
      1, r, s, m.value(), cfg.momentum_cutoff, cfg);
  ComplexIntegralResult trunc = radial_phase_integral(
      1, r, s, m.value(), 0.9 * cfg.momentum_cutoff, cfg);
  full.error_estimate += std::abs(full.value - trunc.value);
  full.evaluations += trunc.evaluations;
  return full;
}

ComplexIntegralResult g2(double r, double s, Mass m,
                         const QuadratureConfig& cfg) {
  if (r < 0.0) throw std::invalid_argument("g2 needs r >= 0");
  ComplexIntegralResult full = radial_phase_integral(
      2, r, s, m.value(), cfg.momentum_cutoff, cfg);
  ComplexIntegralResult trunc = radial_phase_integral(
      2, r, s, m.value(), 0.9 * cfg.momentum_cutoff, cfg);
  full.error_estimate += std::abs(full.value - trunc.value);
  full.evaluations += trunc.evaluations;
  return full;
}

ComplexIntegralResult f_function(const Vec3& dz, const Vec3& x, double t,
                                 double tau, Mass m,
                                 const QuadratureConfig& cfg) {
  ComplexIntegralResult a = radial_phase_integral(
      1, (dz - x).norm(), t - tau, m.value(), cfg.momentum_cutoff, cfg);
  ComplexIntegralResult b = radial_phase_integral(
      2, x.norm(), tau, m.value(), cfg.momentum_cutoff, cfg);
  ComplexIntegralResult out;
  out.value = a.value * b.value;
  out.error_estimate = std::abs(a.value) * b.error_estimate +
                       std::abs(b.value) * a.error_estimate +
                       a.error_estimate * b.error_estimate;
  out.converged = a.converged && b.converged;
  out.evaluations = a.evaluations + b.evaluations;
  return out;
}

ComplexIntegralResult free_commutator(const Vec3& dz, double t, Mass m,
                                      const QuadratureConfig& cfg) {
  const double r = dz.norm();
  cplx values[3];
  double quad_err = 0.0;
  bool conv = true;
  long evals = 0;
  for (int i = 0; i < 3; ++i) {
    ComplexIntegralResult g = radial_phase_integral(
        1, r, t, m.value(), kCutoffLadder[i] * cfg.momentum_cutoff, cfg);
    values[i] = g.value;
    if (i == 2) {
      quad_err = g.error_estimate;
      conv = g.converged;
    }
    evals += g.evaluations;
  }
  double spread = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      spread = std::max(spread, std::abs(values[i].imag() - values[j].imag()));
  ComplexIntegralResult out;
  out.value = cplx(0.0, 2.0 * values[2].imag());
  out.error_estimate = 2.0 * (quad_err + 1.2 * spread);
  out.converged = conv;
  out.evaluations = evals;
  return out;
}

// ---------------------------------------------------------------------------
// Microcausality residual

void MicrocausalityRequest::validate() const {
  if (t < 0.0) throw std::invalid_argument("microcausality needs t >= 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!z1.finite() || !z2.finite())
    throw std::invalid_argument("separation must be finite");
  cfg.validate();
}

namespace {

// residual at a single cutoff; see the header for the formula
cplx residual_at_cutoff(const MicrocausalityRequest& req, double cutoff,
                        double* quad_err, bool* conv, long* evals) {
  const double m = req.mass.value();
  const double dz = (req.z1 - req.z2).norm();
  *quad_err = 0.0;
  *conv = true;
  *evals = 0;

  if (req.noise.kind() == NoiseCorrelator::Kind::white) {
    ComplexIntegralResult a =
        radial_phase_integral(1, dz, req.t, m, cutoff, req.cfg);
    ComplexIntegralResult b =
        radial_phase_integral(2, 0.0, 0.0, m, cutoff, req.cfg);
    const double im = (a.value * b.value).imag();
    *quad_err = req.gamma * m * m * req.noise.strength() * req.t *
                (std::abs(a.value) * b.error_estimate +
                 std::abs(b.value) * a.error_estimate);
    *conv = a.converged && b.converged;
    *evals = a.evaluations + b.evaluations;
    return cplx(0.0, req.gamma * m * m * req.noise.strength() * req.t * im);
  }

  QuadratureConfig inner = req.cfg;
  inner.rel_tol = req.cfg.rel_tol * 10.0;
  const double x_hi = dz + req.t + 25.0 / m;
  long local_evals = 0;
  bool local_conv = true;

  auto x_integral = [&](double tau) {
    const double s1 = req.t - tau;  // time argument of the dz leg
    auto fx = [&](double x) {
      const double d = req.noise.value(Vec3{0, 0, x}, tau);
      if (d == 0.0) return 0.0;
      ComplexIntegralResult leg2 =
          radial_phase_integral(2, x, tau, m, cutoff, inner);
      ComplexIntegralResult ang =
          double_sinc_integral(dz, x, s1, m, cutoff, inner);
      local_evals += leg2.evaluations + ang.evaluations;
      local_conv = local_conv && leg2.converged && ang.converged;
      return x * x * d * (leg2.value * ang.value).imag();
    };
    std::vector<double> breaks{1.0 / m, 5.0 / m, dz, dz + 5.0 / m};
    IntegralResult r = integrate_segmented(fx, 0.0, x_hi, breaks, inner);
    local_evals += r.evaluations;
    local_conv = local_conv && r.converged;
    return kTwoPi * r.value;
  };

  auto f_tau = [&](double tau) { return (req.t - tau) * x_integral(tau); };
  IntegralResult outer = integrate_adaptive(f_tau, 0.0, req.t, req.cfg);
  *quad_err = 2.0 * req.gamma * m * m * outer.error_estimate;
  *conv = outer.converged && local_conv;
  *evals = outer.evaluations + local_evals;
  return cplx(0.0, 2.0 * req.gamma * m * m * outer.value);
}

}  // namespace

MicrocausalityResult microcausality_residual(
    const MicrocausalityRequest& req) {
  req.validate();
  MicrocausalityResult out;
  out.free_part =
      free_commutator(req.z1 - req.z2, req.t, req.mass, req.cfg);

  if (req.noise.is_zero() || req.t == 0.0) {
    out.residual.value = {0.0, 0.0};
    out.residual.converged = true;
    return out;
  }

  cplx values[3];
  double quad_err = 0.0;
  bool conv = true;
  long evals = 0;
  for (int i = 0; i < 3; ++i) {
    double qe = 0.0;
    bool cv = true;
    long ev = 0;
    values[i] = residual_at_cutoff(
        req, kCutoffLadder[i] * req.cfg.momentum_cutoff, &qe, &cv, &ev);
    if (i == 2) {
      quad_err = qe;
      conv = cv;
    }
    evals += ev;
  }
  double spread = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      spread = std::max(spread, std::abs(values[i] - values[j]));
  out.residual.value = values[2];
  out.residual.error_estimate = quad_err + 1.2 * spread;
  out.residual.converged = conv;
  out.residual.evaluations = evals;
  return out;
}

// ---------------------------------------------------------------------------
// Non-relativistic sector

namespace {

struct LeakagePair {
  cplx full{0.0, 0.0};
  cplx transport{0.0, 0.0};
};

void require_axis(const Vec3& p) {
  if (std::hypot(p.x, p.y) > 1e-12 * (std::abs(p.z) + 1.0))
    throw std::invalid_argument(
        "nr_leakage probes must lie on the z axis (the probe grid axis)");
}

}  // namespace

NrLeakage nr_leakage(const SingleParticleState& state,
                     const NoiseCorrelator& noise, const Vec3& p_left,
                     const Vec3& p_right, double t,
                     const QuadratureConfig& cfg) {
  require_axis(p_left);
  require_axis(p_right);
  state.ensure_normalized();
  if (t < 0.0) throw std::invalid_argument("nr_leakage needs t >= 0");

  NrLeakage out;
  out.element.converged = true;
  out.transport.converged = true;
  if (noise.is_zero() || t == 0.0) return out;

  const double m = state.mass().value();
  const Mass mass = state.mass();
  const double pl = p_left.z;
  const double pr = p_right.z;
  const double el = energy(p_left, mass);
  const double er = energy(p_right, mass);
  const double sigma = state.kind() == SingleParticleState::Kind::lattice
                           ? state.grid().dp
                           : state.sigma();

  QuadratureConfig inner = cfg;
  inner.rel_tol = cfg.rel_tol * 0.1;

  long evals = 0;
  bool conv = true;

  // accumulate full element and transport part in one pass
  cplx full_acc{0.0, 0.0}, tr_acc{0.0, 0.0};
  double full_err = 0.0, tr_err = 0.0;

  auto mu_breaks = [&](double q, double p) {
    std::vector<double> b;
    if (p != 0.0 && q != 0.0) {
      for (double w : {0.0, 3.0 * sigma, 6.0 * sigma}) {
        const double mu = (p * p + q * q - w * w) / (2.0 * p * q);
        if (mu > -1.0 && mu < 1.0) b.push_back(mu);
      }
    }
    return b;
  };

  for (int part = 0; part < 2; ++part) {  // 0: full bracket, 1: transport only
    auto fq = [&](double q) -> cplx {
      const TimeKernel kernel = noise.spectral_kernel(q, inner);
      auto fmu = [&](double mu) -> cplx {
        const double wl2 = pl * pl + q * q - 2.0 * pl * q * mu;
        const double wr2 = pr * pr + q * q - 2.0 * pr * q * mu;
        const double elq = std::sqrt(m * m + wl2);
        const double erq = std::sqrt(m * m + wr2);
        const double del = q * (q - 2.0 * pl * mu) / (elq + el);
        const double der = q * (q - 2.0 * pr * mu) / (erq + er);

        const double sperp = q * std::sqrt(std::max(0.0, 1.0 - mu * mu));
        const Vec3 qv{sperp, 0.0, q * mu};
        const cplx a_shift =
            state.amplitude(p_right - qv, p_left - qv);
        cplx term2{0.0, 0.0};
        if (a_shift != cplx{0.0, 0.0}) {
          const cplx phases =
              double_time_phase(kernel, -der, -del, t, inner).value +
              double_time_phase(kernel, del, der, t, inner).value;
          term2 = a_shift * phases / std::sqrt(el * er * erq * elq);
        }
        if (part == 1) return term2;

        cplx term1{0.0, 0.0};
        const cplx a_diag = state.amplitude(p_left, p_right);
        if (a_diag != cplx{0.0, 0.0}) {
          term1 = a_diag *
                  (double_time_phase(kernel, del, del, t, inner).value /
                       (el * elq) +
                   double_time_phase(kernel, -der, -der, t, inner).value /
                       (er * erq));
        }
        return term1 - term2;
      };
      std::vector<double> breaks = mu_breaks(q, pl);
      for (double b : mu_breaks(q, pr)) breaks.push_back(b);
      std::sort(breaks.begin(), breaks.end());
      // complex integral by parts: reuse the segmented real engine twice
      auto fre = [&](double mu) { return fmu(mu).real(); };
      auto fim = [&](double mu) { return fmu(mu).imag(); };
      IntegralResult rr = integrate_segmented(fre, -1.0, 1.0, breaks, inner);
      IntegralResult ri = integrate_segmented(fim, -1.0, 1.0, breaks, inner);
      evals += rr.evaluations + ri.evaluations;
      conv = conv && rr.converged && ri.converged;
      return q * q * cplx(rr.value, ri.value);
    };

    std::vector<double> q_breaks = noise.spectral_breakpoints(inner);
    for (double p : {std::abs(pl), std::abs(pr)}) {
      if (p > 0.0) {
        for (double d : {-6.0 * sigma, 0.0, 6.0 * sigma})
          q_breaks.push_back(p + d);
      }
    }
    q_breaks.push_back(6.0 * sigma);
    auto fre = [&](double q) { return fq(q).real(); };
    auto fim = [&](double q) { return fq(q).imag(); };
    IntegralResult rr =
        integrate_segmented(fre, 0.0, cfg.momentum_cutoff, q_breaks, cfg);
    IntegralResult ri =
        integrate_segmented(fim, 0.0, cfg.momentum_cutoff, q_breaks, cfg);
    conv = conv && rr.converged && ri.converged;
    evals += rr.evaluations + ri.evaluations;
    const double pref = -(m * m / 4.0) * kTwoPi;
    const cplx val = pref * cplx(rr.value, ri.value);
    const double err =
        std::abs(pref) * (rr.error_estimate + ri.error_estimate);
    if (part == 0) {
      full_acc = val;
      full_err = err;
    } else {
      tr_acc = -val;  // transport enters the bracket with a minus sign
      tr_err = err;
    }
  }

  out.element.value = full_acc;
  out.element.error_estimate = full_err;
  out.element.converged = conv;
  out.element.evaluations = evals;
  out.transport.value = tr_acc;
  out.transport.error_estimate = tr_err;
  out.transport.converged = conv;
  return out;
}

NrVerdict nr_sector_verdict(const SingleParticleState& state,
                            const NoiseCorrelator& noise, double kappa,
                            double t, const NrProbeGrid& grid,
                            const QuadratureConfig& cfg) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (grid.count < 2 || !(grid.min_factor > 1.0) ||
      !(grid.max_factor > grid.min_factor))
    throw std::invalid_argument("invalid probe grid");
  const auto nr = state.is_nonrelativistic(kappa);
  if (!nr.nonrelativistic)
    throw std::invalid_argument(
        "nr_sector_verdict requires a non-relativistic state at this kappa");

  const double pc = kappa * state.mass().value();
  NrVerdict out;

  // reference scale: momentum transport on non-relativistic diagonal probes
  for (double f : {0.0, 0.25, 0.5}) {
    const Vec3 p{0, 0, f * pc};
    NrLeakage l = nr_leakage(state, noise, p, p, t, cfg);
    out.diagonal_scale =
        std::max(out.diagonal_scale, std::abs(l.transport.value));
    out.all_converged = out.all_converged && l.transport.converged;
  }

  std::vector<double> probes(grid.count);
  for (int k = 0; k < grid.count; ++k) {
    const double frac = grid.count == 1
                            ? 0.0
                            : static_cast<double>(k) / (grid.count - 1);
    probes[k] = pc * grid.min_factor *
                std::pow(grid.max_factor / grid.min_factor, frac);
  }
  for (double p : probes) {
    for (int mixed = 0; mixed < 2; ++mixed) {
      const Vec3 pl{0, 0, p};
      const Vec3 pr{0, 0, mixed ? 0.0 : p};
      NrLeakage l = nr_leakage(state, noise, pl, pr, t, cfg);
      out.max_leakage = std::max(out.max_leakage, std::abs(l.element.value));
      out.all_converged = out.all_converged && l.element.converged;
      out.probes.push_back(
          {pl.z, pr.z, l.element.value, l.element.error_estimate});
    }
  }
  out.ratio = out.diagonal_scale > 0.0
                  ? out.max_leakage / out.diagonal_scale
                  : (out.max_leakage > 0.0
                         ? std::numeric_limits<double>::infinity()
                         : 0.0);
  out.well_behaved = out.ratio < 1e-3;
  return out;
}

std::complex<double> particle_creation_element(
    const SingleParticleState& state, const NoiseCorrelator& noise,
    const std::vector<Vec3>& two_particle_probes, double t) {
  state.ensure_normalized();
  if (t < 0.0) throw std::invalid_argument("t must be >= 0");
  for (const Vec3& p : two_particle_probes) {
    if (!p.finite())
      throw std::invalid_argument("probe momenta must be finite");
  }
  (void)noise;
  // Every term of the generator pairs one creation with one annihilation
  // operator, so particle number is conserved and the two-particle element
  // of the evolved one-particle state vanishes identically.
  return {0.0, 0.0};
}

}  // namespace collapse
