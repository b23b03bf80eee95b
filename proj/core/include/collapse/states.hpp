#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

#include "collapse/kinematics.hpp"
#include "collapse/quadrature.hpp"

namespace collapse {

class NotNormalized : public std::runtime_error {
 public:
  explicit NotNormalized(double trace)
      : std::runtime_error("state trace deviates from 1 by more than 1e-6: " +
                           std::to_string(trace)) {}
};

/// Uniform 1D momentum grid p_i = (i - n/2) dp along one axis.
struct LatticeGrid {
  int n = 2;
  double dp = 1.0;

  double momentum(int i) const { return (i - n / 2) * dp; }
  void validate() const {
    if (n < 2) throw std::invalid_argument("lattice needs n >= 2");
    if (!(dp > 0.0)) throw std::invalid_argument("lattice needs dp > 0");
  }
};

/// One-particle density operator in the momentum representation, defined by
/// its amplitude kernel A(p_L, p_R). Kernels are evaluated on demand; only
/// the 1D lattice variant materializes a matrix.
///
/// Normalization conventions: the continuum trace is
/// \int d^3p/(2 pi)^3 A(p, p) = 1; the 1D lattice trace is
/// sum_i dp A(p_i, p_i) = 1.
class SingleParticleState {
 public:
  enum class Kind { gaussian_packet, two_packet, lattice };

  static SingleParticleState gaussian_packet(const Vec3& center, double sigma,
                                             Mass m);
  static SingleParticleState two_packet(const Vec3& c0, const Vec3& c1,
                                        double sigma, double phase, Mass m);
  /// The kernel matrix is hermitized; if renormalize is set it is also
  /// rescaled to unit lattice trace.
  static SingleParticleState lattice(LatticeGrid grid,
                                     Eigen::MatrixXcd kernel, Mass m,
                                     bool renormalize);

  Kind kind() const { return kind_; }
  Mass mass() const { return mass_; }
  double sigma() const { return sigma_; }
  const Vec3& center(int which = 0) const { return which ? c1_ : c0_; }
  const LatticeGrid& grid() const { return grid_; }
  const Eigen::MatrixXcd& kernel() const { return kernel_; }

  /// A(p_L, p_R). Lattice kernels are bilinearly interpolated inside the
  /// grid (their momenta live on the grid axis, taken as z) and vanish
  /// outside it.
  std::complex<double> amplitude(const Vec3& p_left, const Vec3& p_right) const;

  /// Tr(rho); analytic for the packet families, a discrete sum for lattices.
  double trace() const;
  /// Numeric cross-check of the trace via quadrature (packet families).
  IntegralResult trace_quadrature(const QuadratureConfig& cfg) const;
  /// Throws NotNormalized when |trace - 1| > 1e-6.
  void ensure_normalized() const;

  /// <E> = integral of the diagonal against E_p.
  IntegralResult mean_energy(const QuadratureConfig& cfg) const;

  struct NrCheck {
    bool nonrelativistic = false;
    double region_sup = 0.0;  // sup |A| over {|pL| > kappa m or |pR| > kappa m}
    double global_sup = 0.0;
  };
  /// True iff the amplitude is < 1e-6 * sup|A| everywhere outside the
  /// momentum ball of radius kappa m.
  NrCheck is_nonrelativistic(double kappa) const;

  /// True when the diagonal A(p, p) is a function of |p| alone.
  bool isotropic_diagonal() const;
  /// Radial diagonal a(|p|) for isotropic states.
  double diagonal_radial(double p_mag) const;
  /// Radius beyond which the diagonal is negligible.
  double diagonal_support_radius() const;
  /// Unit symmetry axis of the diagonal (z for fully isotropic states).
  Vec3 axis() const;

  /// Lattice kernel export: JSON header (grid plus a pointer to the matrix
  /// CSV) and a CSV with real and imaginary parts interleaved per row.
  void save_lattice(const std::string& json_path) const;
  static SingleParticleState load_lattice(const std::string& json_path);

 private:
  explicit SingleParticleState(Mass m) : mass_(m) {}

  Kind kind_ = Kind::gaussian_packet;
  Mass mass_;
  Vec3 c0_, c1_;
  double sigma_ = 1.0;
  double phase_ = 0.0;
  double packet_norm_ = 1.0;  // single-packet amplitude scale C_g
  double two_packet_norm_ = 1.0;
  LatticeGrid grid_;
  Eigen::MatrixXcd kernel_;

  std::complex<double> packet_wave(const Vec3& p) const;
};

}  // namespace collapse
