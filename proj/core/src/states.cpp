#include "collapse/states.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

namespace collapse {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sq(double x) { return x * x; }

}  // namespace

SingleParticleState SingleParticleState::gaussian_packet(const Vec3& center,
                                                         double sigma,
                                                         Mass m) {
  if (!(sigma > 0.0) || !center.finite())
    throw std::invalid_argument("gaussian packet needs sigma > 0");
  SingleParticleState s(m);
  s.kind_ = Kind::gaussian_packet;
  s.c0_ = center;
  s.sigma_ = sigma;
  // \int d^3p/(2 pi)^3 |f|^2 = 1 with f = C exp(-(p-p0)^2/(4 sigma^2))
  s.packet_norm_ = std::pow(kTwoPi, 0.75) / std::pow(sigma, 1.5);
  return s;
}

SingleParticleState SingleParticleState::two_packet(const Vec3& c0,
                                                    const Vec3& c1,
                                                    double sigma, double phase,
                                                    Mass m) {
  if (!(sigma > 0.0) || !c0.finite() || !c1.finite())
    throw std::invalid_argument("two-packet state needs sigma > 0");
  SingleParticleState s(m);
  s.kind_ = Kind::two_packet;
  s.c0_ = c0;
  s.c1_ = c1;
  s.sigma_ = sigma;
  s.phase_ = phase;
  s.packet_norm_ = std::pow(kTwoPi, 0.75) / std::pow(sigma, 1.5);
  const double overlap = std::exp(-(c0 - c1).norm2() / (8.0 * sigma * sigma));
  s.two_packet_norm_ =
      1.0 / std::sqrt(2.0 * (1.0 + overlap * std::cos(phase)));
  return s;
}

SingleParticleState SingleParticleState::lattice(LatticeGrid grid,
                                                 Eigen::MatrixXcd kernel,
                                                 Mass m, bool renormalize) {
  grid.validate();
  if (kernel.rows() != grid.n || kernel.cols() != grid.n)
    throw std::invalid_argument("lattice kernel shape mismatch");
  SingleParticleState s(m);
  s.kind_ = Kind::lattice;
  s.grid_ = grid;
  s.kernel_ = 0.5 * (kernel + kernel.adjoint());
  if (renormalize) {
    const double tr = s.kernel_.real().trace() * grid.dp;
    if (!(std::abs(tr) > 0.0))
      throw std::invalid_argument("lattice kernel has zero trace");
    s.kernel_ /= tr;
  }
  return s;
}

std::complex<double> SingleParticleState::packet_wave(const Vec3& p) const {
  const double s2 = 4.0 * sigma_ * sigma_;
  if (kind_ == Kind::gaussian_packet) {
    return packet_norm_ * std::exp(-(p - c0_).norm2() / s2);
  }
  const std::complex<double> rel = std::polar(1.0, phase_);
  return two_packet_norm_ * packet_norm_ *
         (std::exp(-(p - c0_).norm2() / s2) +
          rel * std::exp(-(p - c1_).norm2() / s2));
}

std::complex<double> SingleParticleState::amplitude(const Vec3& p_left,
                                                    const Vec3& p_right) const {
  switch (kind_) {
    case Kind::gaussian_packet:
    case Kind::two_packet:
      return packet_wave(p_left) * std::conj(packet_wave(p_right));
    case Kind::lattice: {
      const double scale = std::max(std::abs(p_left.z), std::abs(p_right.z));
      if (std::hypot(p_left.x, p_left.y) > 1e-12 * std::max(scale, 1.0) ||
          std::hypot(p_right.x, p_right.y) > 1e-12 * std::max(scale, 1.0))
        throw std::domain_error(
            "lattice kernels are one dimensional; momenta must lie on the "
            "grid axis (z)");
      auto coord = [&](double p) {
        return p / grid_.dp + static_cast<double>(grid_.n / 2);
      };
      const double a = coord(p_left.z);
      const double b = coord(p_right.z);
      if (a < 0.0 || a > grid_.n - 1 || b < 0.0 || b > grid_.n - 1)
        return {0.0, 0.0};
      const int ia = std::min(static_cast<int>(a), grid_.n - 2);
      const int ib = std::min(static_cast<int>(b), grid_.n - 2);
      const double wa = a - ia;
      const double wb = b - ib;
      return (1.0 - wa) * (1.0 - wb) * kernel_(ia, ib) +
             wa * (1.0 - wb) * kernel_(ia + 1, ib) +
             (1.0 - wa) * wb * kernel_(ia, ib + 1) +
             wa * wb * kernel_(ia + 1, ib + 1);
    }
  }
  return {0.0, 0.0};
}

double SingleParticleState::trace() const {
  switch (kind_) {
    case Kind::gaussian_packet:
      return 1.0;
    case Kind::two_packet:
      return 1.0;  // interference included in the closed-form normalization
    case Kind::lattice:
      return kernel_.real().trace() * grid_.dp;
  }
  return 0.0;
}

IntegralResult SingleParticleState::trace_quadrature(
    const QuadratureConfig& cfg) const {
  if (kind_ == Kind::lattice) {
    IntegralResult r;
    r.value = trace();
    r.converged = true;
    return r;
  }
  // cylindrical reduction about the symmetry axis
  const Vec3 n = axis();
  const double p_hi = diagonal_support_radius();
  QuadratureConfig inner = cfg;
  inner.abs_tol = cfg.abs_tol * 1e-2;
  IntegralResult out;
  auto radial = [&](double p) {
    auto ang = [&](double mu) {
      const double pz = p * mu;
      const double pp = p * std::sqrt(std::max(0.0, 1.0 - mu * mu));
      // orthonormal frame (e1, e2, n); the diagonal is azimuth free
      Vec3 e1{0, 0, 0};
      if (std::abs(n.z) < 0.9) {
        e1 = Vec3{-n.y, n.x, 0.0};
      } else {
        e1 = Vec3{0.0, -n.z, n.y};
      }
      const double e1n = e1.norm();
      e1 = (1.0 / e1n) * e1;
      const Vec3 p_vec = pz * n + pp * e1;
      return amplitude(p_vec, p_vec).real();
    };
    IntegralResult r = integrate_adaptive(ang, -1.0, 1.0, inner);
    out.evaluations += r.evaluations;
    return p * p * r.value;
  };
  IntegralResult r = integrate_adaptive(radial, 0.0, p_hi, cfg);
  out.value = r.value * kTwoPi / std::pow(kTwoPi, 3);
  out.error_estimate = r.error_estimate * kTwoPi / std::pow(kTwoPi, 3);
  out.converged = r.converged;
  out.evaluations += r.evaluations;
  return out;
}

void SingleParticleState::ensure_normalized() const {
  const double tr = trace();
  if (std::abs(tr - 1.0) > 1e-6) throw NotNormalized(tr);
}

IntegralResult SingleParticleState::mean_energy(
    const QuadratureConfig& cfg) const {
  if (kind_ == Kind::lattice) {
    IntegralResult r;
    const Mass m = mass_;
    double acc = 0.0;
    for (int i = 0; i < grid_.n; ++i) {
      const double p = grid_.momentum(i);
      acc += kernel_(i, i).real() * grid_.dp *
             energy(Vec3{0, 0, p}, m);
    }
    r.value = acc;
    r.converged = true;
    return r;
  }
  const Vec3 n = axis();
  const double p_hi = diagonal_support_radius();
  QuadratureConfig inner = cfg;
  inner.abs_tol = cfg.abs_tol * 1e-2;
  long evals = 0;
  auto radial = [&](double p) {
    auto ang = [&](double mu) {
      const double pp = p * std::sqrt(std::max(0.0, 1.0 - mu * mu));
      Vec3 e1 = (std::abs(n.z) < 0.9) ? Vec3{-n.y, n.x, 0.0}
                                      : Vec3{0.0, -n.z, n.y};
      e1 = (1.0 / e1.norm()) * e1;
      const Vec3 p_vec = (p * mu) * n + pp * e1;
      return amplitude(p_vec, p_vec).real();
    };
    IntegralResult r = integrate_adaptive(ang, -1.0, 1.0, inner);
    evals += r.evaluations;
    return p * p * r.value * energy(Vec3{0, 0, p}, mass_);
  };
  IntegralResult r = integrate_adaptive(radial, 0.0, p_hi, cfg);
  IntegralResult out;
  out.value = r.value * kTwoPi / std::pow(kTwoPi, 3);
  out.error_estimate = r.error_estimate * kTwoPi / std::pow(kTwoPi, 3);
  out.converged = r.converged;
  out.evaluations = r.evaluations + evals;
  return out;
}

SingleParticleState::NrCheck SingleParticleState::is_nonrelativistic(
    double kappa) const {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  const double cut = kappa * mass_.value();
  NrCheck out;
  switch (kind_) {
    case Kind::gaussian_packet: {
      const double c = c0_.norm();
      out.global_sup = sq(packet_norm_);
      if (c >= cut) {
        out.region_sup = out.global_sup;
      } else {
        out.region_sup =
            out.global_sup * std::exp(-sq(cut - c) / (4.0 * sigma_ * sigma_));
      }
      break;
    }
    case Kind::two_packet: {
      // |f| is maximized on the axis through the packet centers; scan it.
      auto mod_f = [&](double s) {
        const Vec3 d = c1_ - c0_;
        const double dn = d.norm();
        const Vec3 u = dn > 0 ? (1.0 / dn) * d : Vec3{0, 0, 1};
        return std::abs(packet_wave(s * u));
      };
      const double reach =
          std::max(c0_.norm(), c1_.norm()) + 12.0 * sigma_ + cut;
      double sup_all = 0.0, sup_out = 0.0;
      const int n_scan = 4096;
      for (int i = -n_scan; i <= n_scan; ++i) {
        const double s = reach * static_cast<double>(i) / n_scan;
        const double v = mod_f(s);
        sup_all = std::max(sup_all, v);
        if (std::abs(s) > cut) sup_out = std::max(sup_out, v);
      }
      out.global_sup = sq(sup_all);
      out.region_sup = sup_out * sup_all;
      break;
    }
    case Kind::lattice: {
      for (int i = 0; i < grid_.n; ++i) {
        for (int j = 0; j < grid_.n; ++j) {
          const double a = std::abs(kernel_(i, j));
          out.global_sup = std::max(out.global_sup, a);
          if (std::abs(grid_.momentum(i)) > cut ||
              std::abs(grid_.momentum(j)) > cut)
            out.region_sup = std::max(out.region_sup, a);
        }
      }
      break;
    }
  }
  out.nonrelativistic = out.region_sup < 1e-6 * out.global_sup;
  return out;
}

bool SingleParticleState::isotropic_diagonal() const {
  switch (kind_) {
    case Kind::gaussian_packet:
      return c0_.norm() == 0.0;
    case Kind::two_packet:
      return c0_.norm() == 0.0 && c1_.norm() == 0.0;
    case Kind::lattice: {
      // a mirror-symmetric diagonal reads as a radial profile
      for (int i = 1; i < grid_.n; ++i) {
        const int j = grid_.n - i;  // momentum(j) = -momentum(i)
        if (j < 0 || j >= grid_.n) continue;
        const double di = kernel_(i, i).real();
        const double dj = kernel_(j, j).real();
        if (std::abs(di - dj) > 1e-10 * (std::abs(di) + std::abs(dj) + 1e-300))
          return false;
      }
      return true;
    }
  }
  return false;
}

double SingleParticleState::diagonal_radial(double p_mag) const {
  if (!isotropic_diagonal())
    throw std::logic_error("diagonal_radial requires an isotropic diagonal");
  const Vec3 p{0, 0, p_mag};
  return amplitude(p, p).real();
}

double SingleParticleState::diagonal_support_radius() const {
  switch (kind_) {
    case Kind::gaussian_packet:
      return c0_.norm() + 12.0 * sigma_;
    case Kind::two_packet:
      return std::max(c0_.norm(), c1_.norm()) + 12.0 * sigma_;
    case Kind::lattice:
      return std::max(std::abs(grid_.momentum(0)),
                      std::abs(grid_.momentum(grid_.n - 1)));
  }
  return 0.0;
}

Vec3 SingleParticleState::axis() const {
  Vec3 d{0, 0, 1};
  if (kind_ == Kind::gaussian_packet && c0_.norm() > 0.0) {
    d = (1.0 / c0_.norm()) * c0_;
  } else if (kind_ == Kind::two_packet) {
    const Vec3 diff = c1_ - c0_;
    if (diff.norm() > 0.0) {
      d = (1.0 / diff.norm()) * diff;
    } else if (c0_.norm() > 0.0) {
      d = (1.0 / c0_.norm()) * c0_;
    }
  }
  return d;
}

void SingleParticleState::save_lattice(const std::string& json_path) const {
  if (kind_ != Kind::lattice)
    throw std::logic_error("save_lattice requires a lattice state");
  std::string csv_path = json_path;
  const auto dot = csv_path.rfind('.');
  if (dot != std::string::npos) csv_path.resize(dot);
  csv_path += ".csv";

  nlohmann::ordered_json header;
  header["schema"] = 1;
  header["n"] = grid_.n;
  header["dp"] = grid_.dp;
  header["mass"] = mass_.value();
  auto slash = csv_path.rfind('/');
  header["csv"] =
      slash == std::string::npos ? csv_path : csv_path.substr(slash + 1);
  std::ofstream jf(json_path);
  if (!jf) throw std::runtime_error("cannot write " + json_path);
  jf << header.dump(2) << "\n";

  std::ofstream cf(csv_path);
  if (!cf) throw std::runtime_error("cannot write " + csv_path);
  cf.precision(17);
  for (int i = 0; i < grid_.n; ++i) {
    for (int j = 0; j < grid_.n; ++j) {
      if (j) cf << ",";
      cf << kernel_(i, j).real() << "," << kernel_(i, j).imag();
    }
    cf << "\n";
  }
}

SingleParticleState SingleParticleState::load_lattice(
    const std::string& json_path) {
  std::ifstream jf(json_path);
  if (!jf) throw std::runtime_error("cannot open " + json_path);
  nlohmann::json header = nlohmann::json::parse(jf);
  LatticeGrid grid{header.at("n").get<int>(), header.at("dp").get<double>()};
  Mass m(header.at("mass").get<double>());
  std::string csv = header.at("csv").get<std::string>();
  const auto slash = json_path.rfind('/');
  if (slash != std::string::npos && csv.find('/') == std::string::npos)
    csv = json_path.substr(0, slash + 1) + csv;

  Eigen::MatrixXcd kernel(grid.n, grid.n);
  std::ifstream cf(csv);
  if (!cf) throw std::runtime_error("cannot open " + csv);
  std::string line;
  for (int i = 0; i < grid.n; ++i) {
    if (!std::getline(cf, line))
      throw std::runtime_error("lattice csv truncated: " + csv);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    for (int j = 0; j < grid.n; ++j) {
      double re, im;
      if (!(row >> re >> im))
        throw std::runtime_error("lattice csv row too short: " + csv);
      kernel(i, j) = {re, im};
    }
  }
  return lattice(grid, kernel, m, /*renormalize=*/false);
}

}  // namespace collapse
