// Test-only reference implementations. Everything here is deliberately
// independent of the reductions used by the library: nested 2D time
// quadrature instead of the collapsed single integral, dense Kronecker
// superoperators instead of banded assembly, brute-force angular averages,
// and a truncated Fock space for the particle-number argument.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "collapse/evolve.hpp"
#include "collapse/noise.hpp"
#include "collapse/quadrature.hpp"
#include "collapse/states.hpp"

namespace oracles {

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& x,
                    std::vector<double>& w);

/// \int_0^t ds \int_0^s dtau h(s - tau) cos(dE (s - tau)) by nested
/// adaptive quadrature (no change of variables).
double nested_double_time(const std::function<double(double)>& h, double dE,
                          double t);

/// \int_0^t ds \int_0^s dtau h(s - tau) e^{i alpha s} e^{-i beta tau}.
std::complex<double> nested_double_time_phase(
    const std::function<double(double)>& h, double alpha, double beta,
    double t);

/// Full two-angle average (1/4pi) \int dOmega e^{i k.r}.
double angular_plane_wave_average(double k, double r);

/// Dense superoperator of the first-order noise generator, assembled from
/// Kronecker products with 2D Gauss-Legendre time quadrature. Acts on
/// vec(rho) with column-major stacking.
Eigen::MatrixXcd dense_generator_superoperator(
    const collapse::MomentumLattice& lat, const collapse::NoiseCorrelator& noise,
    double t, int time_nodes = 24);

/// Dense dual generator (Heisenberg direction) built the same way.
Eigen::MatrixXcd dense_dual_superoperator(
    const collapse::MomentumLattice& lat, const collapse::NoiseCorrelator& noise,
    double t, int time_nodes = 24);

/// Norm of the two-particle block of the generator applied to a
/// one-particle lattice state, evaluated on a truncated Fock space
/// (vacuum + one + two particles). Zero by particle-number conservation.
double fock_two_particle_block_norm(const collapse::MomentumLattice& lat,
                                    const collapse::NoiseCorrelator& noise,
                                    const Eigen::MatrixXcd& rho_one, double t,
                                    int time_nodes = 16);

/// Brute-force energy moment of the noise generator for an isotropic
/// Gaussian packet at rest: fixed Simpson grids over (p, q), the angular
/// integral by substitution w = |p - q|, and the double time integral by
/// nested Gauss-Legendre through a dense interpolation table in dE.
double brute_force_energy_moment(double sigma, double mass,
                                 const collapse::NoiseCorrelator& noise,
                                 double t, double cutoff);

}  // namespace oracles
