#pragma once

#include <Eigen/Dense>
#include <vector>

#include "collapse/kinematics.hpp"
#include "collapse/noise.hpp"
#include "collapse/quadrature.hpp"
#include "collapse/states.hpp"

namespace collapse {

/// 1D momentum lattice carrying the mass scale.
struct MomentumLattice {
  LatticeGrid grid;
  Mass mass;

  MomentumLattice(LatticeGrid g, Mass m) : grid(g), mass(m) {
    grid.validate();
  }
  int n() const { return grid.n; }
  double p(int i) const { return grid.momentum(i); }
  double energy_at(int i) const {
    return energy(Vec3{0, 0, p(i)}, mass);
  }
};

/// Discretized one-particle density matrix rho_ij ~ A(p_i, p_j), hermitian
/// with unit trace under the lattice measure sum_i dp.
struct LatticeDensityMatrix {
  MomentumLattice lattice;
  Eigen::MatrixXcd rho;

  double trace() const { return rho.real().trace() * lattice.grid.dp; }
  void hermitize() { rho = 0.5 * (rho + rho.adjoint().eval()); }
  double min_eigenvalue() const;
};

/// Single-particle matrix of the momentum-transfer bilinear at transfer
/// q = q_index * dp: elements m e^{i dE(p, q) t} / (2 sqrt(E_p E_{p-q}))
/// on the (p, p - q) band, zero where p - q leaves the lattice.
Eigen::MatrixXcd build_k_matrix(const MomentumLattice& lat, int q_index,
                                double t);

/// Precomputed generator of the noise-averaged first-order map on the
/// lattice. The double time integrals are collapsed per matrix-element
/// phase; the momentum-transfer sum runs over every lattice shift with
/// weight dp / (2 pi). Off-lattice transfers are truncated to zero.
class LatticeGenerator {
 public:
  LatticeGenerator(const MomentumLattice& lat, const NoiseCorrelator& noise,
                   double t, const QuadratureConfig& cfg);

  /// L_t[rho]; traceless and hermiticity preserving to round-off.
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;
  /// Trace dual L*_t[A] (Heisenberg direction).
  Eigen::MatrixXcd apply_dual(const Eigen::MatrixXcd& a) const;

  const MomentumLattice& lattice() const { return lat_; }
  double horizon() const { return t_; }
  bool converged() const { return converged_; }

  /// Trace weight of rho within the largest momentum transfer of the
  /// lattice boundary; a proxy for how much dynamics the truncation drops.
  double edge_weight(const Eigen::MatrixXcd& rho) const;

 private:
  struct Shift {
    int n = 0;
    double weight = 0.0;
    double table_max = 0.0;
    Eigen::MatrixXcd time_table;  // T[a][b], zero where p_a - q off lattice
  };

  MomentumLattice lat_;
  double t_ = 0.0;
  std::vector<Shift> shifts_;
  std::vector<double> e_, sqrt_e_;
  bool converged_ = true;
};

LatticeDensityMatrix apply_generator(const LatticeDensityMatrix& rho,
                                     const NoiseCorrelator& noise, double t,
                                     const QuadratureConfig& cfg);

struct StepResult {
  LatticeDensityMatrix state;
  bool perturbativity_warning = false;
  double generator_norm = 0.0;  // gamma * ||L_t[rho]||_F
  double min_eigenvalue = 0.0;
};

/// rho + gamma L_t[rho]; warns when gamma ||L_t[rho]|| exceeds 0.1.
StepResult step_first_order(const LatticeDensityMatrix& rho,
                            const NoiseCorrelator& noise, double gamma,
                            double t, const QuadratureConfig& cfg);

/// First-order obstruction to factorized Heisenberg evolution:
/// || L*[A B] - L*[A] B - A L*[B] || (spectral norm).
double nonfactorization_witness(const MomentumLattice& lat,
                                const NoiseCorrelator& noise,
                                const Eigen::MatrixXcd& a,
                                const Eigen::MatrixXcd& b, double t,
                                const QuadratureConfig& cfg);

/// Frobenius norm of rho minus its block-diagonal projection, for the given
/// block id per lattice index.
double decoherence_observable(const LatticeDensityMatrix& rho,
                              const std::vector<int>& block_of_index);

// Lattice state factories ----------------------------------------------------

LatticeDensityMatrix lattice_gaussian_packet(const MomentumLattice& lat,
                                             double center, double sigma);
LatticeDensityMatrix lattice_two_packet(const MomentumLattice& lat,
                                        double center0, double center1,
                                        double sigma, double phase);
LatticeDensityMatrix lattice_uniform_mix(const MomentumLattice& lat);
LatticeDensityMatrix lattice_random_density(const MomentumLattice& lat,
                                            std::uint64_t seed);

/// Block split of the lattice indices at momentum zero (negative /
/// non-negative), the natural partition for two-packet states.
std::vector<int> sign_blocks(const MomentumLattice& lat);

}  // namespace collapse
