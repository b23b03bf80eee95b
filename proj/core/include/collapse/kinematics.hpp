#pragma once

#include <cmath>
#include <stdexcept>

namespace collapse {

/// Cartesian 3-vector in natural units (hbar = c = 1). Serves both as a
/// 3-momentum (units of mass) and as a spatial position (units of 1/mass).
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

using ThreeMomentum = Vec3;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(double s, const Vec3& a) {
  return {s * a.x, s * a.y, s * a.z};
}
inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

/// Rest mass of the scalar boson. Strictly positive; the only scale of the
/// model, so every bundled configuration uses m = 1.
class Mass {
 public:
  explicit Mass(double value) : value_(value) {
    if (!(std::isfinite(value) && value > 0.0)) {
      throw std::invalid_argument("Mass must be a positive finite number");
    }
  }
  double value() const { return value_; }

 private:
  double value_;
};

/// Event (t, x) with t in units 1/mass.
struct SpacetimePoint {
  double t = 0.0;
  Vec3 r;
};

/// Pure boost parameterized by a rapidity vector. Zero rapidity is the
/// identity transform.
struct Boost {
  Vec3 rapidity;
};

/// Relativistic dispersion E_p = sqrt(m^2 + |p|^2).
inline double energy(const ThreeMomentum& p, const Mass& m) {
  return std::sqrt(m.value() * m.value() + p.norm2());
}

/// Energy transfer dE(p,q) = E_{p-q} - E_p.
inline double delta_energy(const ThreeMomentum& p, const ThreeMomentum& q,
                           const Mass& m) {
  return energy(p - q, m) - energy(p, m);
}

/// Squared invariant interval (dt)^2 - |dx|^2 with signature (+,-,-,-).
/// Negative for space-like pairs, positive for time-like pairs.
inline double invariant_interval(const SpacetimePoint& z1,
                                 const SpacetimePoint& z2) {
  const double dt = z1.t - z2.t;
  return dt * dt - (z1.r - z2.r).norm2();
}

inline bool is_spacelike(const SpacetimePoint& z1, const SpacetimePoint& z2) {
  return invariant_interval(z1, z2) < 0.0;
}

/// Proper orthochronous boost of an event. Preserves the invariant interval
/// to round-off.
inline SpacetimePoint boost(const SpacetimePoint& z, const Boost& b) {
  const double chi = b.rapidity.norm();
  if (chi == 0.0) return z;
  const Vec3 n = (1.0 / chi) * b.rapidity;
  const double nr = dot(n, z.r);
  const double ch = std::cosh(chi);
  const double sh = std::sinh(chi);
  SpacetimePoint out;
  out.t = ch * z.t - sh * nr;
  out.r = z.r + ((ch - 1.0) * nr - sh * z.t) * n;
  return out;
}

}  // namespace collapse
