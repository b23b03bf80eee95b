#include "collapse/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace collapse {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double pow32(double x) { return x * std::sqrt(x); }

}  // namespace

// ---------------------------------------------------------------------------
// TabulatedProfile

TabulatedProfile::TabulatedProfile(std::vector<double> x,
                                   std::vector<double> v)
    : x_(std::move(x)), v_(std::move(v)) {
  if (x_.size() != v_.size() || x_.size() < 2)
    throw std::invalid_argument("tabulated profile needs >= 2 rows");
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(v_[i]))
      throw std::invalid_argument("tabulated profile has non-finite entries");
    if (i > 0 && !(x_[i] > x_[i - 1]))
      throw std::invalid_argument(
          "tabulated profile abscissae must be strictly increasing");
  }
}

TabulatedProfile TabulatedProfile::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table file: " + path);
  std::vector<double> x, v;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (!(row >> a >> b)) {
      if (first) {  // tolerate a header row
        first = false;
        continue;
      }
      throw std::runtime_error("malformed table row in " + path + ": " + line);
    }
    first = false;
    x.push_back(a);
    v.push_back(b);
  }
  return TabulatedProfile(std::move(x), std::move(v));
}

double TabulatedProfile::operator()(double x) const {
  if (x_.empty() || x < x_.front() || x > x_.back()) return 0.0;
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  if (it == x_.begin()) return v_.front();
  if (it == x_.end()) return v_.back();
  const std::size_t i = static_cast<std::size_t>(it - x_.begin());
  const double w = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
  return (1.0 - w) * v_[i - 1] + w * v_[i];
}

// ---------------------------------------------------------------------------
// SpatialProfile

SpatialProfile SpatialProfile::gaussian(double r_c, double m0) {
  if (!(r_c > 0.0) || !(m0 > 0.0))
    throw std::invalid_argument("gaussian profile needs r_c > 0 and m0 > 0");
  SpatialProfile p;
  p.kind = Kind::gaussian;
  p.r_c = r_c;
  p.m0 = m0;
  return p;
}

SpatialProfile SpatialProfile::tabulated(TabulatedProfile t,
                                         bool momentum_space) {
  if (t.empty()) throw std::invalid_argument("empty tabulated profile");
  SpatialProfile p;
  p.kind = momentum_space ? Kind::tabulated_momentum : Kind::tabulated_radius;
  p.table = std::move(t);
  if (!momentum_space) {
    // A legitimate Gaussian noise needs a positive-semidefinite correlator:
    // sample the radial spectrum and reject profiles that go negative.
    QuadratureConfig cfg;
    cfg.rel_tol = 1e-6;
    const double span = p.table.max_abscissa() - p.table.min_abscissa();
    const double dx = span / static_cast<double>(
                                 std::max<std::size_t>(
                                     2, p.table.abscissae().size() - 1));
    const double q_max = std::numbers::pi / std::max(dx, 1e-6 * span);
    double max_abs = 0.0, min_val = 0.0;
    for (int i = 0; i <= 192; ++i) {
      const double q = q_max * static_cast<double>(i) / 192.0;
      bool ok = true;
      const double ft = p.fourier(q, cfg, &ok);
      max_abs = std::max(max_abs, std::abs(ft));
      min_val = std::min(min_val, ft);
    }
    if (max_abs > 0.0 && min_val < -1e-6 * max_abs)
      throw std::invalid_argument(
          "tabulated radial profile has a negative spectrum; it cannot come "
          "from a Gaussian noise");
  }
  return p;
}

double SpatialProfile::value(double r, const QuadratureConfig& cfg) const {
  switch (kind) {
    case Kind::gaussian: {
      const double norm =
          1.0 / (m0 * m0 * pow32(4.0 * std::numbers::pi * r_c * r_c));
      return norm * std::exp(-r * r / (2.0 * r_c * r_c));
    }
    case Kind::tabulated_radius:
      return table(r);
    case Kind::tabulated_momentum: {
      // inverse transform g(r) = (1/(2 pi)^3) \int d^3q e^{i q.x} g~(q)
      const double q_hi = table.max_abscissa();
      auto f = [&](double q) {
        return q * q * spherical_phase_average(q, r) * table(q);
      };
      IntegralResult res = integrate_adaptive(f, 0.0, q_hi, cfg);
      return res.value * 4.0 * std::numbers::pi / std::pow(kTwoPi, 3);
    }
  }
  return 0.0;
}

double SpatialProfile::fourier(double q, const QuadratureConfig& cfg,
                               bool* ok) const {
  if (ok) *ok = true;
  switch (kind) {
    case Kind::gaussian:
      // (2 pi r_c^2)^{3/2} / (m0^2 (4 pi r_c^2)^{3/2}) = 2^{-3/2} / m0^2
      return std::exp(-0.5 * q * q * r_c * r_c) /
             (m0 * m0 * pow32(2.0));
    case Kind::tabulated_momentum:
      return table(q);
    case Kind::tabulated_radius: {
      const double r_hi = table.max_abscissa();
      auto f = [&](double r) {
        return r * r * spherical_phase_average(q, r) * table(r);
      };
      QuadratureConfig c = cfg;
      c.max_subdivisions = std::max(cfg.max_subdivisions, 200);
      IntegralResult res = integrate_adaptive(f, 0.0, r_hi, c);
      if (ok) *ok = res.converged;
      return 4.0 * std::numbers::pi * res.value;
    }
  }
  return 0.0;
}

double SpatialProfile::fourier_peak(const QuadratureConfig& cfg) const {
  if (kind == Kind::gaussian) return fourier(0.0, cfg);
  double peak = 0.0;
  const double q_hi =
      (kind == Kind::tabulated_momentum)
          ? table.max_abscissa()
          : std::numbers::pi * 256.0 / std::max(table.max_abscissa(), 1e-12);
  for (int i = 0; i <= 256; ++i) {
    const double q = q_hi * static_cast<double>(i) / 256.0;
    peak = std::max(peak, std::abs(fourier(q, cfg)));
  }
  return peak;
}

// ---------------------------------------------------------------------------
// TemporalKernel

TemporalKernel TemporalKernel::dirac() { return TemporalKernel{}; }

TemporalKernel TemporalKernel::exponential(double omega_c) {
  if (!(omega_c > 0.0))
    throw std::invalid_argument("exponential kernel needs omega_c > 0");
  TemporalKernel k;
  k.kind = Kind::exponential;
  k.omega_c = omega_c;
  return k;
}

TemporalKernel TemporalKernel::gaussian(double tau_c) {
  if (!(tau_c > 0.0))
    throw std::invalid_argument("gaussian kernel needs tau_c > 0");
  TemporalKernel k;
  k.kind = Kind::gaussian;
  k.tau_c = tau_c;
  return k;
}

double TemporalKernel::value(double u) const {
  switch (kind) {
    case Kind::dirac:
      throw std::domain_error("dirac temporal kernel is not pointwise");
    case Kind::exponential:
      return 0.5 * omega_c * std::exp(-omega_c * std::abs(u));
    case Kind::gaussian:
      return std::exp(-u * u / (2.0 * tau_c * tau_c)) /
             (tau_c * std::sqrt(kTwoPi));
  }
  return 0.0;
}

TimeKernel TemporalKernel::kernel() const {
  TimeKernel k;
  switch (kind) {
    case Kind::dirac:
      k.dirac_weight = 1.0;
      break;
    case Kind::exponential:
      k.shape = TimeKernel::Shape::exponential;
      k.coeff = 0.5 * omega_c;
      k.rate = omega_c;
      break;
    case Kind::gaussian:
      k.shape = TimeKernel::Shape::gaussian;
      k.coeff = 1.0 / (tau_c * std::sqrt(kTwoPi));
      k.width = tau_c;
      break;
  }
  return k;
}

// ---------------------------------------------------------------------------
// NoiseCorrelator

NoiseCorrelator NoiseCorrelator::zero() { return NoiseCorrelator{}; }

NoiseCorrelator NoiseCorrelator::white(double strength) {
  if (!(strength > 0.0))
    throw std::invalid_argument("white noise strength must be positive");
  NoiseCorrelator n;
  n.kind_ = Kind::white;
  n.strength_ = strength;
  return n;
}

NoiseCorrelator NoiseCorrelator::separable(SpatialProfile spatial,
                                           TemporalKernel temporal) {
  NoiseCorrelator n;
  n.kind_ = Kind::separable;
  n.spatial_ = std::move(spatial);
  n.temporal_ = temporal;
  return n;
}

NoiseCorrelator NoiseCorrelator::invariant_gaussian(double amplitude,
                                                    double scale) {
  if (!(amplitude > 0.0) || !(scale > 0.0))
    throw std::invalid_argument(
        "invariant correlator needs positive amplitude and scale");
  NoiseCorrelator n;
  n.kind_ = Kind::invariant_radial;
  n.inv_amplitude_ = amplitude;
  n.inv_scale_ = scale;
  return n;
}

NoiseCorrelator NoiseCorrelator::invariant_table(TabulatedProfile over_s2) {
  if (over_s2.empty()) throw std::invalid_argument("empty invariant table");
  NoiseCorrelator n;
  n.kind_ = Kind::invariant_radial;
  n.inv_table_ = std::move(over_s2);
  n.inv_tabulated_ = true;
  return n;
}

double NoiseCorrelator::invariant_value(double s2) const {
  if (inv_tabulated_) return inv_table_(s2);
  const double x = s2 / (inv_scale_ * inv_scale_);
  return inv_amplitude_ * std::exp(-x * x);
}

double NoiseCorrelator::value(const Vec3& x, double tau) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::white:
      throw WhiteNoiseNotPointwise();
    case Kind::separable: {
      QuadratureConfig cfg;
      return spatial_.value(x.norm(), cfg) * temporal_.value(tau);
    }
    case Kind::invariant_radial:
      return invariant_value(tau * tau - x.norm2());
  }
  return 0.0;
}

SpectralValue NoiseCorrelator::fourier_qt(double q_mag, double u,
                                          const QuadratureConfig& cfg) const {
  if (q_mag < 0.0) throw std::invalid_argument("fourier_qt needs q >= 0");
  SpectralValue out;
  if (kind_ == Kind::separable) {
    bool ok = true;
    const double w = spatial_.fourier(q_mag, cfg, &ok);
    out.converged = ok;
    if (temporal_.kind == TemporalKernel::Kind::dirac) {
      out.delta_weight = w;
    } else {
      out.value = w * temporal_.value(u);
    }
    return out;
  }
  TimeKernel k = spectral_kernel(q_mag, cfg);
  out.delta_weight = k.dirac_weight;
  if (k.has_smooth()) out.value = k.smooth(u);
  return out;
}

TimeKernel NoiseCorrelator::spectral_kernel(double q_mag,
                                            const QuadratureConfig& cfg) const {
  switch (kind_) {
    case Kind::zero:
      return TimeKernel::zero();
    case Kind::white:
      // Pinned normalization: a delta-correlated noise of unit strength has
      // the flat spectrum (2 pi)^3 delta(u).
      return TimeKernel::dirac(std::pow(kTwoPi, 3) * strength_);
    case Kind::separable: {
      const double w = spatial_.fourier(q_mag, cfg);
      return temporal_.kernel().scaled(w);
    }
    case Kind::invariant_radial: {
      TimeKernel k;
      k.shape = TimeKernel::Shape::generic;
      NoiseCorrelator self = *this;
      QuadratureConfig c = cfg;
      k.fn = [self, q_mag, c](double u) {
        // D~(q, u) = 4 pi \int dx x^2 sinc(q x) D(x, u)
        const double scale =
            self.inv_tabulated_
                ? std::sqrt(std::abs(self.inv_table_.max_abscissa()) +
                            std::abs(self.inv_table_.min_abscissa()) + 1.0)
                : self.inv_scale_;
        const double x_hi = std::sqrt(u * u + 9.0 * scale * scale) + scale;
        auto f = [&](double x) {
          return x * x * spherical_phase_average(q_mag, x) *
                 self.invariant_value(u * u - x * x);
        };
        IntegralResult res = integrate_adaptive(f, 0.0, x_hi, c);
        return 4.0 * std::numbers::pi * res.value;
      };
      return k;
    }
  }
  return TimeKernel::zero();
}

double NoiseCorrelator::momentum_support_bound(
    double eps, const QuadratureConfig& cfg) const {
  if (!(eps > 0.0))
    throw std::invalid_argument("momentum_support_bound needs eps > 0");
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::white:
      return std::numeric_limits<double>::infinity();
    case Kind::separable: {
      // The temporal factor cancels in the sup ratio.
      if (spatial_.kind == SpatialProfile::Kind::gaussian) {
        if (eps >= 1.0) return 0.0;
        return std::sqrt(2.0 * std::log(1.0 / eps)) / spatial_.r_c;
      }
      if (spatial_.kind == SpatialProfile::Kind::tabulated_momentum) {
        const double peak = spatial_.fourier_peak(cfg);
        const auto& qs = spatial_.table.abscissae();
        const auto& vs = spatial_.table.values();
        double bound = 0.0;
        for (std::size_t i = qs.size(); i-- > 0;) {
          if (std::abs(vs[i]) >= eps * peak) {
            bound = (i + 1 < qs.size()) ? qs[i + 1] : qs[i];
            break;
          }
        }
        return bound;
      }
      // tabulated radial profile: scan the numeric spectrum
      const double peak = spatial_.fourier_peak(cfg);
      const double q_hi =
          std::numbers::pi * 256.0 /
          std::max(spatial_.table.max_abscissa(), 1e-12);
      double bound = q_hi;
      for (int i = 256; i >= 0; --i) {
        const double q = q_hi * static_cast<double>(i) / 256.0;
        if (std::abs(spatial_.fourier(q, cfg)) >= eps * peak) {
          bound = q_hi * static_cast<double>(i + 1) / 256.0;
          break;
        }
        bound = q;
      }
      return bound;
    }
    case Kind::invariant_radial: {
      // scan the numeric spectrum at u = 0 (the envelope peaks there)
      const double scale =
          inv_tabulated_
              ? std::sqrt(std::abs(inv_table_.max_abscissa()) +
                          std::abs(inv_table_.min_abscissa()) + 1.0)
              : inv_scale_;
      TimeKernel k = spectral_kernel(0.0, cfg);
      double peak = std::abs(k.smooth(0.0));
      const double q_hi = 64.0 / scale;
      double bound = q_hi;
      for (int i = 192; i >= 0; --i) {
        const double q = q_hi * static_cast<double>(i) / 192.0;
        TimeKernel kq = spectral_kernel(q, cfg);
        if (std::abs(kq.smooth(0.0)) >= eps * peak) {
          bound = q_hi * static_cast<double>(i + 1) / 192.0;
          break;
        }
        bound = q;
      }
      return bound;
    }
  }
  return 0.0;
}

std::vector<double> NoiseCorrelator::spectral_breakpoints(
    const QuadratureConfig& cfg) const {
  std::vector<double> pts;
  if (kind_ == Kind::separable || kind_ == Kind::invariant_radial) {
    for (double eps : {1e-1, 1e-3, 1e-6, 1e-10}) {
      const double b = momentum_support_bound(eps, cfg);
      if (std::isfinite(b) && b > 0.0) pts.push_back(b);
    }
  }
  return pts;
}

double check_invariance(
    const NoiseCorrelator& n,
    const std::vector<std::pair<SpacetimePoint, SpacetimePoint>>& pairs,
    const std::vector<Boost>& boosts) {
  if (!n.pointwise()) throw WhiteNoiseNotPointwise();
  double max_dev = 0.0;
  for (const auto& pr : pairs) {
    const double base = n.value(pr.first.r - pr.second.r,
                                pr.first.t - pr.second.t);
    for (const auto& b : boosts) {
      const SpacetimePoint z1 = boost(pr.first, b);
      const SpacetimePoint z2 = boost(pr.second, b);
      const double v = n.value(z1.r - z2.r, z1.t - z2.t);
      max_dev = std::max(max_dev, std::abs(v - base));
    }
  }
  return max_dev;
}

}  // namespace collapse
