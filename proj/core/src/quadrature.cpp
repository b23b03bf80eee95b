#include "collapse/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <thread>

namespace collapse {

namespace {

using cplx = std::complex<double>;

// 15-point Kronrod / 7-point Gauss pair (nodes on [-1, 1]).
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277,
                           0.381830050505119, 0.417959183673469};

template <class T>
double vnorm(T v) {
  if constexpr (std::is_same_v<T, double>) {
    return std::abs(v);
  } else {
    return std::abs(v);
  }
}

template <class T, class F>
void kron15(const F& f, double a, double b, T& integral, double& error,
            long& evals) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const T fc = f(mid);
  T res_g = kWg[3] * fc;
  T res_k = kWgk[7] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const T fsum = f(mid - dx) + f(mid + dx);
    res_k += kWgk[j] * fsum;
    if (j % 2 == 1) res_g += kWg[j / 2] * fsum;
  }
  evals += 15;
  integral = res_k * half;
  error = vnorm<T>((res_k - res_g) * half);
}

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
};

template <class T>
struct SegmentWorse {
  bool operator()(const Segment<T>& l, const Segment<T>& r) const {
    if (l.error != r.error) return l.error < r.error;
    if (l.a != r.a) return l.a > r.a;  // deterministic tie break
    return l.b > r.b;
  }
};

template <class T, class R>
R adaptive_impl(const std::function<T(double)>& f, double a, double b,
                const QuadratureConfig& cfg) {
  R out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  long evals = 0;
  Segment<T> whole;
  kron15<T>(f, a, b, whole.value, whole.error, evals);
  whole.a = a;
  whole.b = b;

  std::priority_queue<Segment<T>, std::vector<Segment<T>>, SegmentWorse<T>> q;
  q.push(whole);
  T total = whole.value;
  double err = whole.error;
  int splits = 0;
  while (splits < cfg.max_subdivisions) {
    const double tol = std::max(cfg.abs_tol, cfg.rel_tol * vnorm<T>(total));
    if (err <= tol) break;
    Segment<T> worst = q.top();
    q.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {  // interval exhausted
      q.push(worst);
      break;
    }
    Segment<T> left{worst.a, mid, T{}, 0.0};
    Segment<T> right{mid, worst.b, T{}, 0.0};
    kron15<T>(f, left.a, left.b, left.value, left.error, evals);
    kron15<T>(f, right.a, right.b, right.value, right.error, evals);
    total = total - worst.value + left.value + right.value;
    err = err - worst.error + left.error + right.error;
    q.push(left);
    q.push(right);
    ++splits;
  }
  out.value = total;
  out.error_estimate = err;
  out.evaluations = evals;
  out.converged =
      err <= std::max(cfg.abs_tol, cfg.rel_tol * vnorm<T>(total));
  return out;
}

}  // namespace

IntegralResult integrate_adaptive(const std::function<double(double)>& f,
                                  double a, double b,
                                  const QuadratureConfig& cfg) {
  return adaptive_impl<double, IntegralResult>(f, a, b, cfg);
}

ComplexIntegralResult integrate_adaptive_complex(
    const std::function<cplx(double)>& f, double a, double b,
    const QuadratureConfig& cfg) {
  return adaptive_impl<cplx, ComplexIntegralResult>(f, a, b, cfg);
}

IntegralResult integrate_radial(const std::function<double(double)>& f,
                                const QuadratureConfig& cfg) {
  return integrate_adaptive(f, 0.0, cfg.momentum_cutoff, cfg);
}

IntegralResult integrate_segmented(const std::function<double(double)>& f,
                                   double a, double b,
                                   const std::vector<double>& breaks,
                                   const QuadratureConfig& cfg) {
  std::vector<double> pts;
  pts.push_back(a);
  for (double x : breaks) {
    if (x > a && x < b) pts.push_back(x);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  IntegralResult out;
  out.converged = true;
  QuadratureConfig piece = cfg;
  piece.abs_tol = cfg.abs_tol / static_cast<double>(pts.size());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    IntegralResult r = integrate_adaptive(f, pts[i], pts[i + 1], piece);
    out.value += r.value;
    out.error_estimate += r.error_estimate;
    out.evaluations += r.evaluations;
    out.converged = out.converged && r.converged;
  }
  out.converged = out.converged ||
                  out.error_estimate <=
                      std::max(cfg.abs_tol, cfg.rel_tol * std::abs(out.value));
  return out;
}

ComplexIntegralResult integrate_oscillatory(
    const std::function<cplx(double)>& f, double a, double b,
    double phase_rate, const QuadratureConfig& cfg) {
  const double span = b - a;
  const double cycles = std::abs(phase_rate) * span / std::numbers::pi;
  long n_panels = static_cast<long>(std::ceil(cycles));
  n_panels = std::clamp<long>(n_panels, 1, 16384);
  if (n_panels <= 4) {
    return integrate_adaptive_complex(f, a, b, cfg);
  }
  QuadratureConfig panel_cfg = cfg;
  panel_cfg.abs_tol = cfg.abs_tol / static_cast<double>(n_panels);
  panel_cfg.max_subdivisions = 40;
  ComplexIntegralResult out;
  out.converged = true;
  for (long i = 0; i < n_panels; ++i) {
    const double pa = a + span * static_cast<double>(i) / n_panels;
    const double pb = a + span * static_cast<double>(i + 1) / n_panels;
    ComplexIntegralResult r = integrate_adaptive_complex(f, pa, pb, panel_cfg);
    out.value += r.value;
    out.error_estimate += r.error_estimate;
    out.evaluations += r.evaluations;
  }
  out.converged = out.error_estimate <=
                  std::max(cfg.abs_tol, cfg.rel_tol * std::abs(out.value));
  return out;
}

double spherical_phase_average(double k_mag, double r_mag) {
  const double x = k_mag * r_mag;
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

double TimeKernel::smooth(double u) const {
  switch (shape) {
    case Shape::none:
      return 0.0;
    case Shape::exponential:
      return coeff * std::exp(-rate * std::abs(u));
    case Shape::gaussian:
      return coeff * std::exp(-u * u / (2.0 * width * width));
    case Shape::generic:
      return fn ? fn(u) : 0.0;
  }
  return 0.0;
}

TimeKernel TimeKernel::scaled(double s) const {
  TimeKernel k = *this;
  k.dirac_weight *= s;
  k.coeff *= s;
  if (shape == Shape::generic && fn) {
    auto base = fn;
    k.fn = [base, s](double u) { return s * base(u); };
  }
  return k;
}

std::complex<double> phase_ramp(double T, double w) {
  const double x = w * T;
  if (std::abs(x) < 1e-6) {
    // (e^{ix} - 1)/(i w) = T (1 + i x/2 - x^2/6 - i x^3/24 + ...)
    return T * cplx(1.0 - x * x / 6.0, x / 2.0 - x * x * x / 24.0);
  }
  const cplx iw(0.0, w);
  return (std::exp(cplx(0.0, x)) - 1.0) / iw;
}

namespace {

// \int_0^t (t-u) e^{-z u} du = (z t - 1 + e^{-z t}) / z^2, with a series
// fallback for small |z t|.
cplx ramp_exp_moment(cplx z, double t) {
  const double zt_mag = std::abs(z) * t;
  if (zt_mag < 1e-4) {
    const cplx zt = z * t;
    return t * t * (0.5 - zt / 6.0 + zt * zt / 24.0);
  }
  return (z * t - 1.0 + std::exp(-z * t)) / (z * z);
}

// \int_0^t (t-u)^2 e^{-z u} du = (z^2 t^2 - 2 z t + 2 - 2 e^{-z t}) / z^3.
cplx ramp2_exp_moment(cplx z, double t) {
  const double zt_mag = std::abs(z) * t;
  if (zt_mag < 1e-4) {
    const cplx zt = z * t;
    return t * t * t * (1.0 / 3.0 - zt / 12.0 + zt * zt / 60.0);
  }
  return (z * z * t * t - 2.0 * z * t + 2.0 - 2.0 * std::exp(-z * t)) /
         (z * z * z);
}

}  // namespace

IntegralResult reduce_double_time(const TimeKernel& h, double dE, double t,
                                  const QuadratureConfig& cfg) {
  IntegralResult out;
  out.converged = true;
  if (t < 0.0) throw std::invalid_argument("reduce_double_time: t < 0");
  if (t == 0.0) return out;
  // Dirac spike at u = 0 carries boundary weight 1/2.
  out.value += 0.5 * h.dirac_weight * t;  // cos(0) = 1
  if (!h.has_smooth()) return out;

  if (h.shape == TimeKernel::Shape::exponential) {
    const cplx z(h.rate, -dE);
    out.value += h.coeff * ramp_exp_moment(z, t).real();
    return out;
  }
  auto integrand = [&](double u) {
    return (t - u) * h.smooth(u) * std::cos(dE * u);
  };
  IntegralResult smooth_part;
  if (std::abs(dE) * t > 8.0 * std::numbers::pi) {
    auto c_int = integrate_oscillatory(
        [&](double u) { return cplx(integrand(u), 0.0); }, 0.0, t,
        std::abs(dE), cfg);
    smooth_part.value = c_int.value.real();
    smooth_part.error_estimate = c_int.error_estimate;
    smooth_part.converged = c_int.converged;
    smooth_part.evaluations = c_int.evaluations;
  } else {
    smooth_part = integrate_adaptive(integrand, 0.0, t, cfg);
  }
  out.value += smooth_part.value;
  out.error_estimate += smooth_part.error_estimate;
  out.evaluations += smooth_part.evaluations;
  out.converged = smooth_part.converged;
  return out;
}

ComplexIntegralResult double_time_phase(const TimeKernel& h, double alpha,
                                        double beta, double t,
                                        const QuadratureConfig& cfg) {
  ComplexIntegralResult out;
  out.converged = true;
  if (t < 0.0) throw std::invalid_argument("double_time_phase: t < 0");
  if (t == 0.0) return out;
  const double wp = alpha - beta;
  out.value += 0.5 * h.dirac_weight * phase_ramp(t, wp);
  if (!h.has_smooth()) return out;

  if (h.shape == TimeKernel::Shape::exponential) {
    const cplx z(h.rate, -alpha);
    cplx smooth;
    if (std::abs(wp) * t < 1e-5) {
      // PhaseRamp(T, wp) ~ T + i wp T^2 / 2
      smooth = ramp_exp_moment(z, t) +
               cplx(0.0, 0.5 * wp) * ramp2_exp_moment(z, t);
    } else {
      const cplx iwp(0.0, wp);
      const cplx zw = z + iwp;
      const cplx first =
          std::exp(cplx(0.0, wp * t)) * (1.0 - std::exp(-zw * t)) / zw;
      const cplx second = (1.0 - std::exp(-z * t)) / z;
      smooth = (first - second) / iwp;
    }
    out.value += h.coeff * smooth;
    return out;
  }
  auto integrand = [&](double u) -> cplx {
    return h.smooth(u) * std::exp(cplx(0.0, alpha * u)) *
           phase_ramp(t - u, wp);
  };
  const double rate = std::abs(alpha) + std::abs(wp);
  ComplexIntegralResult smooth_part =
      (rate * t > 8.0 * std::numbers::pi)
          ? integrate_oscillatory(integrand, 0.0, t, rate, cfg)
          : integrate_adaptive_complex(integrand, 0.0, t, cfg);
  out.value += smooth_part.value;
  out.error_estimate += smooth_part.error_estimate;
  out.evaluations += smooth_part.evaluations;
  out.converged = smooth_part.converged;
  return out;
}

McResult mc_integrate(const std::function<cplx(const double*)>& f,
                      const std::vector<double>& lo,
                      const std::vector<double>& hi,
                      const QuadratureConfig& cfg) {
  const std::size_t dim = lo.size();
  if (dim == 0 || dim > 7 || hi.size() != dim)
    throw std::invalid_argument("mc_integrate supports 1..7 dimensions");
  double vol = 1.0;
  for (std::size_t d = 0; d < dim; ++d) {
    if (!(hi[d] > lo[d]))
      throw std::invalid_argument("mc_integrate: empty box");
    vol *= hi[d] - lo[d];
  }
  std::mt19937_64 rng(cfg.rng_seed);
  auto uniform01 = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  double x[7];
  long double sum_re = 0.0L, sum_im = 0.0L, sq_re = 0.0L, sq_im = 0.0L;
  const long n = cfg.mc_samples;
  for (long i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = lo[d] + (hi[d] - lo[d]) * uniform01();
    }
    const cplx v = f(x);
    sum_re += v.real();
    sum_im += v.imag();
    sq_re += static_cast<long double>(v.real()) * v.real();
    sq_im += static_cast<long double>(v.imag()) * v.imag();
  }
  const double mean_re = static_cast<double>(sum_re / n);
  const double mean_im = static_cast<double>(sum_im / n);
  auto stderr_of = [n](long double sq, double mean) {
    const double var =
        std::max(0.0, static_cast<double>(sq / n) - mean * mean);
    return std::sqrt(var / static_cast<double>(n));
  };
  McResult out;
  out.value = vol * cplx(mean_re, mean_im);
  out.stderr_re = vol * stderr_of(sq_re, mean_re);
  out.stderr_im = vol * stderr_of(sq_im, mean_im);
  out.evaluations = n;
  return out;
}

const char* to_string(ScanVerdict v) {
  switch (v) {
    case ScanVerdict::plateau:
      return "plateau";
    case ScanVerdict::diverging:
      return "diverging";
    case ScanVerdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

CutoffScan cutoff_scan(const std::function<IntegralResult(double)>& family,
                       const std::vector<double>& cutoffs,
                       const QuadratureConfig& cfg) {
  if (cutoffs.size() < 4)
    throw std::invalid_argument("cutoff_scan needs at least 4 cutoffs");
  for (std::size_t i = 0; i + 1 < cutoffs.size(); ++i) {
    if (!(cutoffs[i] < cutoffs[i + 1]))
      throw std::invalid_argument("cutoff_scan cutoffs must be increasing");
  }
  CutoffScan scan;
  scan.points.resize(cutoffs.size());
  parallel_for(
      static_cast<long>(cutoffs.size()), cfg.threads, [&](long i) {
        IntegralResult r = family(cutoffs[i]);
        scan.points[i] = {cutoffs[i], r.value, r.error_estimate, r.converged};
      });
  scan.all_converged = true;
  for (const auto& p : scan.points)
    scan.all_converged = scan.all_converged && p.converged;

  const auto& pts = scan.points;
  const double last = std::abs(pts.back().value);
  const double prev = std::abs(pts[pts.size() - 2].value);
  bool increasing = true;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(std::abs(pts[i + 1].value) > std::abs(pts[i].value)))
      increasing = false;
  }
  if (std::abs(pts.back().value - pts[pts.size() - 2].value) <
      cfg.plateau_rel_tol * std::max(last, 1e-300)) {
    scan.verdict = ScanVerdict::plateau;
  } else if (increasing && prev > 0.0 && last / prev > cfg.divergence_ratio) {
    scan.verdict = ScanVerdict::diverging;
  } else {
    scan.verdict = ScanVerdict::inconclusive;
  }
  return scan;
}

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  const int workers =
      static_cast<int>(std::max<long>(1, std::min<long>(threads, n)));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (long i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace collapse
