#pragma once

#include <Eigen/Dense>

namespace spherelab {

using AmbientVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Ambient-distance margin to a projection pole.
inline constexpr double kPoleTolerance = 1e-9;

// Unit vector of R^{n+2}; inputs are renormalized on construction.
class SpherePoint {
 public:
  explicit SpherePoint(const AmbientVector& v);

  const AmbientVector& v() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }
  double operator[](int i) const { return v_[i]; }

  // Canonical basis vector e_{k+1} (0-based k) of R^{dim}.
  static SpherePoint basis(int dim, int k);
  // e_{n+2}, the "north pole".
  static SpherePoint north(int dim) { return basis(dim, dim - 1); }
  static SpherePoint south(int dim);

 private:
  AmbientVector v_;
};

// A vector of R^{n+2} orthogonal to its base point.
class TangentVector {
 public:
  // Throws DomainError unless |<dir, base>| <= 1e-10 |dir|.
  TangentVector(SpherePoint base, AmbientVector dir);
  // Orthogonal projection of an arbitrary vector onto the tangent space.
  static TangentVector project(const SpherePoint& base, const AmbientVector& v);

  const SpherePoint& base() const { return base_; }
  const AmbientVector& dir() const { return dir_; }
  double norm() const { return dir_.norm(); }

 private:
  SpherePoint base_;
  AmbientVector dir_;
};

// Element of SO(n+2).
class Rotation {
 public:
  // Throws DomainError unless m^T m = I and det m = +1 within 1e-10.
  explicit Rotation(const Matrix& m);
  static Rotation identity(int dim);

  const Matrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  Rotation inverse() const;
  AmbientVector operator()(const AmbientVector& v) const { return m_ * v; }
  SpherePoint operator()(const SpherePoint& p) const { return SpherePoint(m_ * p.v()); }
  Rotation operator*(const Rotation& o) const;

 private:
  Matrix m_;
};

// Point of E^{n+1}, or of the affine hyperplane R^{n+1} x {-1} with the
// constant last coordinate dropped.
struct EuclideanPoint {
  AmbientVector coords;
};

// cos|v| p + sin|v| v/|v|; p itself for the zero vector.
SpherePoint exp_sphere(const SpherePoint& p, const TangentVector& v);

// p in S^n given as an (n+2)-vector with last coordinate 0;
// returns sin r p - cos r e_{n+2}. Throws DomainError for r outside (0, pi).
SpherePoint iota_r(double r, const AmbientVector& p);

// Stereographic projection from -c, sending c to the origin.
// Throws PoleError when p is within kPoleTolerance of -c.
EuclideanPoint stereographic(const SpherePoint& c, const SpherePoint& p);
SpherePoint stereographic_inv(const SpherePoint& c, const EuclideanPoint& x);

// sigma_c^{-1}(s sigma_c(p)), s in (0, 1].
SpherePoint moebius(const SpherePoint& c, double s, const SpherePoint& p);

// (q - s<q,e>e)/|...|, s in [0, 1]. Throws PoleError near +-e_{n+2}.
SpherePoint zeta(double s, const SpherePoint& q);
// Orthogonal projection to the equatorial S^n, returned in R^{n+1}.
AmbientVector tau(const SpherePoint& q);
// Closed-form differential of zeta_s at q applied to u.
AmbientVector dzeta(double s, const SpherePoint& q, const TangentVector& u);

// q/(-<q,e_{n+2}>) for strictly southern q. Throws DomainError otherwise.
EuclideanPoint central_projection(const SpherePoint& q);
SpherePoint central_projection_inv(const EuclideanPoint& x);

// Deterministic Q in SO(n+2) with Q(-e_{n+2}) = c: the rotation in the plane
// of -e_{n+2} and c, or a half-turn in the (e_1, e_{n+2}) plane when c = e_{n+2}.
Rotation rotation_to(const SpherePoint& c);

// Angle between two unit vectors, accurate for nearly (anti)parallel inputs.
double angle_between(const AmbientVector& a, const AmbientVector& b);

}  // namespace spherelab
