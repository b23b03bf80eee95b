#include "collapse/evolve.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace collapse {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using cplx = std::complex<double>;

}  // namespace

double LatticeDensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho,
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXcd build_k_matrix(const MomentumLattice& lat, int q_index,
                                double t) {
  const int n = lat.n();
  if (q_index <= -n || q_index >= n)
    throw std::invalid_argument("momentum transfer leaves the lattice");
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(n, n);
  const double m = lat.mass.value();
  for (int i = 0; i < n; ++i) {
    const int j = i - q_index;  // p_j = p_i - q
    if (j < 0 || j >= n) continue;
    const double de = lat.energy_at(j) - lat.energy_at(i);
    k(i, j) = m * std::polar(1.0, de * t) /
              (2.0 * std::sqrt(lat.energy_at(i) * lat.energy_at(j)));
  }
  return k;
}

LatticeGenerator::LatticeGenerator(const MomentumLattice& lat,
                                   const NoiseCorrelator& noise, double t,
                                   const QuadratureConfig& cfg)
    : lat_(lat), t_(t) {
  if (t < 0.0) throw std::invalid_argument("generator horizon t must be >= 0");
  const int n = lat_.n();
  e_.resize(n);
  sqrt_e_.resize(n);
  for (int i = 0; i < n; ++i) {
    e_[i] = lat_.energy_at(i);
    sqrt_e_[i] = std::sqrt(e_[i]);
  }
  if (noise.is_zero() || t == 0.0) return;

  shifts_.resize(2 * n - 1);
  std::vector<char> ok(shifts_.size(), 1);
  parallel_for(
      static_cast<long>(shifts_.size()), cfg.threads, [&](long s) {
        const int nq = static_cast<int>(s) - (n - 1);
        Shift shift;
        shift.n = nq;
        shift.weight = lat_.grid.dp / kTwoPi;
        const double q = std::abs(nq) * lat_.grid.dp;
        const TimeKernel kernel = noise.spectral_kernel(q, cfg);
        shift.time_table = Eigen::MatrixXcd::Zero(n, n);
        // theta_a = E_{p_a - q} - E_{p_a}, defined while a - nq stays on the
        // lattice
        std::vector<double> theta(n, 0.0);
        std::vector<char> valid(n, 0);
        for (int a = 0; a < n; ++a) {
          const int b = a - nq;
          if (b < 0 || b >= n) continue;
          theta[a] = e_[b] - e_[a];
          valid[a] = 1;
        }
        for (int a = 0; a < n; ++a) {
          if (!valid[a]) continue;
          for (int b = 0; b < n; ++b) {
            if (!valid[b]) continue;
            ComplexIntegralResult r =
                double_time_phase(kernel, theta[a], theta[b], t, cfg);
            shift.time_table(a, b) = r.value;
            shift.table_max = std::max(shift.table_max, std::abs(r.value));
            if (!r.converged) ok[s] = 0;
          }
        }
        shifts_[s] = std::move(shift);
      });
  for (char c : ok) converged_ = converged_ && (c != 0);
}

Eigen::MatrixXcd LatticeGenerator::apply(const Eigen::MatrixXcd& rho) const {
  const int n = lat_.n();
  if (rho.rows() != n || rho.cols() != n)
    throw std::invalid_argument("density matrix shape mismatch");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  const double m2 = lat_.mass.value() * lat_.mass.value();
  for (const Shift& sh : shifts_) {
    const int nq = sh.n;
    const double w = sh.weight * m2 / 4.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        cplx acc(0.0, 0.0);
        // sandwich K^dag(tau) rho K(s): feeds (i, j) from (i+nq, j+nq)
        if (i + nq >= 0 && i + nq < n && j + nq >= 0 && j + nq < n) {
          const double c = 1.0 / (sqrt_e_[i + nq] * sqrt_e_[i] *
                                  sqrt_e_[j + nq] * sqrt_e_[j]);
          acc += c * rho(i + nq, j + nq) * sh.time_table(j + nq, i + nq);
        }
        // sandwich K(s) rho K^dag(tau): feeds (i, j) from (i-nq, j-nq)
        if (i - nq >= 0 && i - nq < n && j - nq >= 0 && j - nq < n) {
          const double c = 1.0 / (sqrt_e_[i] * sqrt_e_[i - nq] *
                                  sqrt_e_[j] * sqrt_e_[j - nq]);
          acc += c * rho(i - nq, j - nq) * sh.time_table(i, j);
        }
        // ordered products (no-jump part), diagonal in the band index
        if (i - nq >= 0 && i - nq < n) {
          acc -= rho(i, j) * sh.time_table(i, i) / (e_[i] * e_[i - nq]);
        }
        if (j + nq >= 0 && j + nq < n) {
          acc -= rho(i, j) * sh.time_table(j + nq, j + nq) /
                 (e_[j + nq] * e_[j]);
        }
        out(i, j) += w * acc;
      }
    }
  }
  return out;
}

Eigen::MatrixXcd LatticeGenerator::apply_dual(
    const Eigen::MatrixXcd& a) const {
  const int n = lat_.n();
  if (a.rows() != n || a.cols() != n)
    throw std::invalid_argument("observable shape mismatch");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  const double m2 = lat_.mass.value() * lat_.mass.value();
  for (const Shift& sh : shifts_) {
    const int nq = sh.n;
    const double w = sh.weight * m2 / 4.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        cplx acc(0.0, 0.0);
        // K(s) A K^dag(tau)
        if (i - nq >= 0 && i - nq < n && j - nq >= 0 && j - nq < n) {
          const double c = 1.0 / (sqrt_e_[i] * sqrt_e_[i - nq] *
                                  sqrt_e_[j] * sqrt_e_[j - nq]);
          acc += c * a(i - nq, j - nq) * sh.time_table(i, j);
        }
        // K^dag(tau) A K(s)
        if (i + nq >= 0 && i + nq < n && j + nq >= 0 && j + nq < n) {
          const double c = 1.0 / (sqrt_e_[i + nq] * sqrt_e_[i] *
                                  sqrt_e_[j + nq] * sqrt_e_[j]);
          acc += c * a(i + nq, j + nq) * sh.time_table(j + nq, i + nq);
        }
        // - A K(s) K^dag(tau)
        if (j - nq >= 0 && j - nq < n) {
          acc -= a(i, j) * sh.time_table(j, j) / (e_[j] * e_[j - nq]);
        }
        // - K^dag(tau) K(s) A
        if (i + nq >= 0 && i + nq < n) {
          acc -= a(i, j) * sh.time_table(i + nq, i + nq) /
                 (e_[i + nq] * e_[i]);
        }
        out(i, j) += w * acc;
      }
    }
  }
  return out;
}

double LatticeGenerator::edge_weight(const Eigen::MatrixXcd& rho) const {
  const int n = lat_.n();
  double global = 0.0;
  for (const Shift& sh : shifts_) global = std::max(global, sh.table_max);
  int band = 0;
  for (const Shift& sh : shifts_) {
    if (sh.table_max > 1e-10 * global) band = std::max(band, std::abs(sh.n));
  }
  band = std::min(band, n / 2);
  // population within one effective transfer of the lattice boundary
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i < band || i >= n - band) acc += std::abs(rho(i, i).real());
  }
  return acc * lat_.grid.dp;
}

LatticeDensityMatrix apply_generator(const LatticeDensityMatrix& rho,
                                     const NoiseCorrelator& noise, double t,
                                     const QuadratureConfig& cfg) {
  LatticeGenerator gen(rho.lattice, noise, t, cfg);
  return LatticeDensityMatrix{rho.lattice, gen.apply(rho.rho)};
}

StepResult step_first_order(const LatticeDensityMatrix& rho,
                            const NoiseCorrelator& noise, double gamma,
                            double t, const QuadratureConfig& cfg) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  LatticeGenerator gen(rho.lattice, noise, t, cfg);
  Eigen::MatrixXcd delta = gen.apply(rho.rho);
  StepResult out{LatticeDensityMatrix{rho.lattice, rho.rho + gamma * delta},
                 false, gamma * delta.norm(), 0.0};
  out.state.hermitize();
  out.perturbativity_warning = out.generator_norm > 0.1;
  out.min_eigenvalue = out.state.min_eigenvalue();
  return out;
}

double nonfactorization_witness(const MomentumLattice& lat,
                                const NoiseCorrelator& noise,
                                const Eigen::MatrixXcd& a,
                                const Eigen::MatrixXcd& b, double t,
                                const QuadratureConfig& cfg) {
  LatticeGenerator gen(lat, noise, t, cfg);
  const Eigen::MatrixXcd lhs = gen.apply_dual(a * b);
  const Eigen::MatrixXcd rhs = gen.apply_dual(a) * b + a * gen.apply_dual(b);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(lhs - rhs);
  return svd.singularValues()(0);
}

double decoherence_observable(const LatticeDensityMatrix& rho,
                              const std::vector<int>& block_of_index) {
  const int n = rho.lattice.n();
  if (static_cast<int>(block_of_index.size()) != n)
    throw std::invalid_argument("block partition size mismatch");
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (block_of_index[i] != block_of_index[j])
        acc += std::norm(rho.rho(i, j));
    }
  }
  return std::sqrt(acc);
}

LatticeDensityMatrix lattice_gaussian_packet(const MomentumLattice& lat,
                                             double center, double sigma) {
  const int n = lat.n();
  Eigen::VectorXcd f(n);
  for (int i = 0; i < n; ++i) {
    const double p = lat.p(i);
    f(i) = std::exp(-(p - center) * (p - center) / (4.0 * sigma * sigma));
  }
  Eigen::MatrixXcd rho = f * f.adjoint();
  rho /= rho.real().trace() * lat.grid.dp;
  return LatticeDensityMatrix{lat, rho};
}

LatticeDensityMatrix lattice_two_packet(const MomentumLattice& lat,
                                        double center0, double center1,
                                        double sigma, double phase) {
  const int n = lat.n();
  Eigen::VectorXcd f(n);
  const cplx rel = std::polar(1.0, phase);
  for (int i = 0; i < n; ++i) {
    const double p = lat.p(i);
    f(i) = std::exp(-(p - center0) * (p - center0) / (4.0 * sigma * sigma)) +
           rel * std::exp(-(p - center1) * (p - center1) /
                          (4.0 * sigma * sigma));
  }
  Eigen::MatrixXcd rho = f * f.adjoint();
  rho /= rho.real().trace() * lat.grid.dp;
  return LatticeDensityMatrix{lat, rho};
}

LatticeDensityMatrix lattice_uniform_mix(const MomentumLattice& lat) {
  const int n = lat.n();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(n, n);
  rho /= static_cast<double>(n) * lat.grid.dp;
  return LatticeDensityMatrix{lat, rho};
}

LatticeDensityMatrix lattice_random_density(const MomentumLattice& lat,
                                            std::uint64_t seed) {
  const int n = lat.n();
  std::mt19937_64 rng(seed);
  auto uniform01 = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  auto normal = [&]() {
    // Box-Muller with explicit uniforms so the stream is reproducible
    const double u1 = std::max(uniform01(), 1e-300);
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  };
  Eigen::MatrixXcd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = cplx(normal(), normal());
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.real().trace() * lat.grid.dp;
  return LatticeDensityMatrix{lat, rho};
}

std::vector<int> sign_blocks(const MomentumLattice& lat) {
  std::vector<int> blocks(lat.n());
  for (int i = 0; i < lat.n(); ++i) blocks[i] = lat.p(i) < 0.0 ? 0 : 1;
  return blocks;
}

}  // namespace collapse
