#include "oracles.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracles {

namespace {

using collapse::IntegralResult;
using collapse::QuadratureConfig;
using cplx = std::complex<double>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

QuadratureConfig tight() {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-15;
  return cfg;
}

}  // namespace

void gauss_legendre(int n, double a, double b, std::vector<double>& x,
                    std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);
    x[i] = xm - xl * z;
    x[n - 1 - i] = xm + xl * z;
    w[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

double nested_double_time(const std::function<double(double)>& h, double dE,
                          double t) {
  const QuadratureConfig cfg = tight();
  auto outer = [&](double s) {
    auto inner = [&](double tau) {
      const double u = s - tau;
      return h(u) * std::cos(dE * u);
    };
    return collapse::integrate_adaptive(inner, 0.0, s, cfg).value;
  };
  return collapse::integrate_adaptive(outer, 0.0, t, cfg).value;
}

cplx nested_double_time_phase(const std::function<double(double)>& h,
                              double alpha, double beta, double t) {
  const QuadratureConfig cfg = tight();
  auto outer = [&](double s) -> cplx {
    auto inner = [&](double tau) -> cplx {
      return h(s - tau) * std::exp(cplx(0.0, alpha * s - beta * tau));
    };
    return collapse::integrate_adaptive_complex(inner, 0.0, s, cfg).value;
  };
  return collapse::integrate_adaptive_complex(outer, 0.0, t, cfg).value;
}

double angular_plane_wave_average(double k, double r) {
  std::vector<double> xt, wt, xp, wp;
  gauss_legendre(192, 0.0, std::numbers::pi, xt, wt);
  gauss_legendre(64, 0.0, kTwoPi, xp, wp);
  double acc = 0.0;
  for (int i = 0; i < 192; ++i) {
    double az = 0.0;
    for (int j = 0; j < 64; ++j) az += wp[j];
    acc += wt[i] * std::sin(xt[i]) * std::cos(k * r * std::cos(xt[i])) * az;
  }
  return acc / (4.0 * std::numbers::pi);
}

namespace {

// shared scaffolding for the dense superoperators
struct DenseNodes {
  std::vector<double> s, ws, v, wv;
};

DenseNodes time_nodes_for(double t, int n) {
  DenseNodes nodes;
  gauss_legendre(n, 0.0, t, nodes.s, nodes.ws);
  gauss_legendre(n, 0.0, 1.0, nodes.v, nodes.wv);
  return nodes;
}

Eigen::MatrixXcd dense_super_impl(const collapse::MomentumLattice& lat,
                                  const collapse::NoiseCorrelator& noise,
                                  double t, int time_nodes, bool dual) {
  const int n = lat.n();
  const int dim = n * n;
  Eigen::MatrixXcd super = Eigen::MatrixXcd::Zero(dim, dim);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const DenseNodes nodes = time_nodes_for(t, time_nodes);
  QuadratureConfig cfg;

  for (int nq = -(n - 1); nq <= n - 1; ++nq) {
    const double q = std::abs(nq) * lat.grid.dp;
    const collapse::TimeKernel kernel = noise.spectral_kernel(q, cfg);
    if (!kernel.has_smooth())
      throw std::invalid_argument(
          "dense oracle needs a smooth temporal kernel");
    const double weight = lat.grid.dp / kTwoPi;
    for (int a = 0; a < time_nodes; ++a) {
      const double s = nodes.s[a];
      const Eigen::MatrixXcd ks = collapse::build_k_matrix(lat, nq, s);
      for (int b = 0; b < time_nodes; ++b) {
        const double tau = s * nodes.v[b];
        const double jac = s;  // tau = s * v
        const double dval = kernel.smooth(s - tau);
        const double wgt = weight * nodes.ws[a] * nodes.wv[b] * jac * dval;
        if (wgt == 0.0) continue;
        const Eigen::MatrixXcd ktau = collapse::build_k_matrix(lat, nq, tau);
        const Eigen::MatrixXcd kdag = ktau.adjoint();
        Eigen::MatrixXcd term;
        if (!dual) {
          // K^dag(tau) rho K(s) + K(s) rho K^dag(tau)
          //   - K(s) K^dag(tau) rho - rho K^dag(tau) K(s)
          term = Eigen::kroneckerProduct(ks.transpose(), kdag).eval();
          term += Eigen::kroneckerProduct(ktau.conjugate(), ks).eval();
          term -= Eigen::kroneckerProduct(id, (ks * kdag).eval()).eval();
          term -= Eigen::kroneckerProduct((kdag * ks).transpose().eval(), id)
                      .eval();
        } else {
          // K(s) A K^dag(tau) + K^dag(tau) A K(s)
          //   - A K(s) K^dag(tau) - K^dag(tau) K(s) A
          term = Eigen::kroneckerProduct(kdag.transpose().eval(), ks).eval();
          term += Eigen::kroneckerProduct(ks.transpose(), kdag).eval();
          term -= Eigen::kroneckerProduct((ks * kdag).transpose().eval(), id)
                      .eval();
          term -= Eigen::kroneckerProduct(id, (kdag * ks).eval()).eval();
        }
        super += wgt * term;
      }
    }
  }
  return super;
}

}  // namespace

Eigen::MatrixXcd dense_generator_superoperator(
    const collapse::MomentumLattice& lat,
    const collapse::NoiseCorrelator& noise, double t, int time_nodes) {
  return dense_super_impl(lat, noise, t, time_nodes, /*dual=*/false);
}

Eigen::MatrixXcd dense_dual_superoperator(
    const collapse::MomentumLattice& lat,
    const collapse::NoiseCorrelator& noise, double t, int time_nodes) {
  return dense_super_impl(lat, noise, t, time_nodes, /*dual=*/true);
}

namespace {

// Bosonic Fock space truncated at two particles over the lattice modes.
struct FockSpace {
  int modes = 0;
  std::vector<std::vector<int>> occ;  // occupation vectors
  std::vector<Eigen::MatrixXcd> a_dag;

  explicit FockSpace(int n_modes) : modes(n_modes) {
    occ.push_back(std::vector<int>(modes, 0));  // vacuum
    for (int i = 0; i < modes; ++i) {
      std::vector<int> v(modes, 0);
      v[i] = 1;
      occ.push_back(v);
    }
    for (int i = 0; i < modes; ++i) {
      for (int j = i; j < modes; ++j) {
        std::vector<int> v(modes, 0);
        v[i] += 1;
        v[j] += 1;
        occ.push_back(v);
      }
    }
    const int dim = static_cast<int>(occ.size());
    a_dag.assign(modes, Eigen::MatrixXcd::Zero(dim, dim));
    for (int k = 0; k < modes; ++k) {
      for (int s = 0; s < dim; ++s) {
        std::vector<int> target = occ[s];
        target[k] += 1;
        int total = 0;
        for (int c : target) total += c;
        if (total > 2) continue;  // truncated away
        for (int d = 0; d < dim; ++d) {
          if (occ[d] == target) {
            a_dag[k](d, s) = std::sqrt(static_cast<double>(target[k]));
            break;
          }
        }
      }
    }
  }

  int particle_count(int index) const {
    int total = 0;
    for (int c : occ[index]) total += c;
    return total;
  }
};

}  // namespace

double fock_two_particle_block_norm(const collapse::MomentumLattice& lat,
                                    const collapse::NoiseCorrelator& noise,
                                    const Eigen::MatrixXcd& rho_one, double t,
                                    int time_nodes) {
  const int n = lat.n();
  FockSpace fock(n);
  const int dim = static_cast<int>(fock.occ.size());

  // one-particle embedding: basis states 1..n follow the vacuum
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rho(1 + i, 1 + j) = rho_one(i, j);

  auto k_fock = [&](int nq, double time) {
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(dim, dim);
    const double m = lat.mass.value();
    for (int i = 0; i < n; ++i) {
      const int j = i - nq;
      if (j < 0 || j >= n) continue;
      const double de = lat.energy_at(j) - lat.energy_at(i);
      const cplx c = m * std::polar(1.0, de * time) /
                     (2.0 * std::sqrt(lat.energy_at(i) * lat.energy_at(j)));
      k += c * (fock.a_dag[i] * fock.a_dag[j].adjoint());
    }
    return k;
  };

  DenseNodes nodes = time_nodes_for(t, time_nodes);
  QuadratureConfig cfg;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (int nq = -(n - 1); nq <= n - 1; ++nq) {
    const double q = std::abs(nq) * lat.grid.dp;
    const collapse::TimeKernel kernel = noise.spectral_kernel(q, cfg);
    if (!kernel.has_smooth()) continue;
    const double weight = lat.grid.dp / kTwoPi;
    for (int a = 0; a < time_nodes; ++a) {
      const double s = nodes.s[a];
      const Eigen::MatrixXcd ks = k_fock(nq, s);
      for (int b = 0; b < time_nodes; ++b) {
        const double tau = s * nodes.v[b];
        const double wgt =
            weight * nodes.ws[a] * nodes.wv[b] * s * kernel.smooth(s - tau);
        if (wgt == 0.0) continue;
        const Eigen::MatrixXcd kdag = k_fock(nq, tau).adjoint();
        out += wgt * (kdag * rho * ks + ks * rho * kdag - ks * kdag * rho -
                      rho * kdag * ks);
      }
    }
  }

  double acc = 0.0;
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      if (fock.particle_count(r) == 2 || fock.particle_count(c) == 2)
        acc += std::norm(out(r, c));
    }
  }
  return std::sqrt(acc);
}

double brute_force_energy_moment(double sigma, double mass,
                                 const collapse::NoiseCorrelator& noise,
                                 double t, double cutoff) {
  QuadratureConfig cfg;
  const double m = mass;
  const double c2 = std::pow(kTwoPi, 1.5) / std::pow(sigma, 3.0);

  // time-factor table over dE via nested Gauss-Legendre on the (s, tau)
  // triangle, exploiting only the separability of the input spectrum
  const bool white = noise.kind() == collapse::NoiseCorrelator::Kind::white;
  double q_hi = cutoff;
  if (!white) {
    const double bound = noise.momentum_support_bound(1e-16, cfg);
    if (std::isfinite(bound)) q_hi = std::min(cutoff, 1.25 * bound);
  }
  const double p_hi = 12.0 * sigma;
  const double de_max = q_hi * (q_hi + 2.0 * p_hi) / (2.0 * m) + 1.0;

  const int table_n = 4001;
  std::vector<double> theta_table;
  double theta_white = 0.0;
  if (white) {
    theta_white =
        0.5 * std::pow(kTwoPi, 3) * noise.strength() * t;  // boundary 1/2
  } else {
    theta_table.resize(table_n);
    std::vector<double> xs, ws, xv, wv;
    gauss_legendre(24, 0.0, t, xs, ws);
    gauss_legendre(24, 0.0, 1.0, xv, wv);
    for (int i = 0; i < table_n; ++i) {
      const double de = -de_max + 2.0 * de_max * i / (table_n - 1);
      double acc = 0.0;
      for (int a = 0; a < 24; ++a) {
        for (int b = 0; b < 24; ++b) {
          const double s = xs[a];
          const double u = s - s * xv[b];
          acc += ws[a] * wv[b] * s *
                 noise.temporal().value(u) * std::cos(de * u);
        }
      }
      theta_table[i] = acc;
    }
  }
  auto theta_of = [&](double de) {
    if (white) return theta_white;
    const double pos = (de + de_max) / (2.0 * de_max) * (table_n - 1);
    const int i = std::min(std::max(1, static_cast<int>(pos)), table_n - 3);
    const double u = pos - i;
    // Catmull-Rom through the four neighbouring table values
    const double y0 = theta_table[i - 1], y1 = theta_table[i],
                 y2 = theta_table[i + 1], y3 = theta_table[i + 2];
    return y1 + 0.5 * u *
                    (y2 - y0 +
                     u * (2.0 * y0 - 5.0 * y1 + 4.0 * y2 - y3 +
                          u * (3.0 * (y1 - y2) + y3 - y0)));
  };
  auto spectral = [&](double q) {
    if (white) return 1.0;
    bool ok = true;
    return noise.spatial().fourier(q, cfg, &ok);
  };
  auto simpson = [](int n_pts, double a, double b, auto&& f) {
    // n_pts odd
    const double h = (b - a) / (n_pts - 1);
    double acc = f(a) + f(b);
    for (int i = 1; i < n_pts - 1; ++i)
      acc += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
    return acc * h / 3.0;
  };

  auto angular = [&](double p, double q) {
    const double ep = std::sqrt(m * m + p * p);
    auto integrand_w = [&](double w) {
      const double ew = std::sqrt(m * m + w * w);
      const double bracket = 0.5 / ew - 0.5 / ep;
      return w * bracket * theta_of(ew - ep);
    };
    if (p * q < 1e-14) {
      const double w = std::sqrt(p * p + q * q);
      const double ew = std::sqrt(m * m + w * w);
      return 2.0 * (0.5 / ew - 0.5 / ep) * theta_of(ew - ep);
    }
    const double w_lo = std::abs(p - q);
    const double w_hi = p + q;
    return simpson(81, w_lo, w_hi, integrand_w) / (p * q);
  };

  auto q_integral = [&](double p) {
    auto fq = [&](double q) { return q * q * spectral(q) * angular(p, q); };
    return simpson(601, 0.0, q_hi, fq);
  };
  auto fp = [&](double p) {
    const double a = c2 * std::exp(-p * p / (2.0 * sigma * sigma));
    return p * p * a * q_integral(p);
  };
  const double integral = simpson(201, 0.0, p_hi, fp);
  return -(m * m / std::numbers::pi) * integral;
}

}  // namespace oracles
