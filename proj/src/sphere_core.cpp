#include "spherelab/sphere_core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "spherelab/errors.hpp"
#include "spherelab/point_maps.hpp"

namespace spherelab {
namespace {

std::vector<double> to_std(const AmbientVector& v) { return {v.data(), v.data() + v.size()}; }

AmbientVector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const AmbientVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require_pole_free(const SpherePoint& p, const AmbientVector& pole, const char* what) {
  if ((p.v() - pole).norm() <= kPoleTolerance) {
    throw PoleError(std::string(what) + ": point within pole tolerance of the excluded pole");
  }
}

}  // namespace

SpherePoint::SpherePoint(const AmbientVector& v) : v_(v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n == 0.0) throw DomainError("sphere point: zero or non-finite vector");
  v_ /= n;
}

SpherePoint SpherePoint::basis(int dim, int k) {
  AmbientVector e = AmbientVector::Zero(dim);
  e[k] = 1.0;
  return SpherePoint(e);
}

SpherePoint SpherePoint::south(int dim) {
  AmbientVector e = AmbientVector::Zero(dim);
  e[dim - 1] = -1.0;
  return SpherePoint(e);
}

TangentVector::TangentVector(SpherePoint base, AmbientVector dir)
    : base_(std::move(base)), dir_(std::move(dir)) {
  if (dir_.size() != base_.v().size()) throw DomainError("tangent vector: dimension mismatch");
  if (std::abs(dir_.dot(base_.v())) > 1e-10 * std::max(dir_.norm(), 1e-300) &&
      dir_.norm() > 0.0) {
    throw DomainError("tangent vector: direction not orthogonal to base point");
  }
}

TangentVector TangentVector::project(const SpherePoint& base, const AmbientVector& v) {
  return TangentVector(base, v - v.dot(base.v()) * base.v());
}

Rotation::Rotation(const Matrix& m) : m_(m) {
  if (m.rows() != m.cols()) throw DomainError("rotation: non-square matrix");
  const Matrix err = m.transpose() * m - Matrix::Identity(m.rows(), m.cols());
  if (err.cwiseAbs().maxCoeff() > 1e-10) throw DomainError("rotation: matrix not orthogonal");
  if (std::abs(m.determinant() - 1.0) > 1e-10) throw DomainError("rotation: determinant not +1");
}

Rotation Rotation::identity(int dim) { return Rotation(Matrix::Identity(dim, dim)); }

Rotation Rotation::inverse() const { return Rotation(m_.transpose()); }

Rotation Rotation::operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }

SpherePoint exp_sphere(const SpherePoint& p, const TangentVector& v) {
  if ((v.base().v() - p.v()).norm() > 1e-12) throw DomainError("exp_sphere: vector not based at p");
  const double len = v.norm();
  if (len == 0.0) return p;
  return SpherePoint(std::cos(len) * p.v() + std::sin(len) * (v.dir() / len));
}

SpherePoint iota_r(double r, const AmbientVector& p) {
  if (!(r > 0.0 && r < std::numbers::pi)) throw DomainError("iota_r: r outside (0, pi)");
  if (std::abs(p.norm() - 1.0) > 1e-10 || std::abs(p[p.size() - 1]) > 1e-10) {
    throw DomainError("iota_r: p must be a unit vector with vanishing last coordinate");
  }
  const std::vector<double> head(p.data(), p.data() + p.size() - 1);
  return SpherePoint(to_eigen(maps::iota(r, head)));
}

EuclideanPoint stereographic(const SpherePoint& c, const SpherePoint& p) {
  require_pole_free(p, -c.v(), "stereographic");
  const Rotation frame = rotation_to(c);
  // In the frame c sits at -e; project from +e.
  const AmbientVector q = frame.matrix().transpose() * p.v();
  const Eigen::Index last = q.size() - 1;
  return {q.head(last) / (1.0 - q[last])};
}

SpherePoint stereographic_inv(const SpherePoint& c, const EuclideanPoint& x) {
  const Eigen::Index m = x.coords.size();
  if (m + 1 != c.dim()) throw DomainError("stereographic_inv: dimension mismatch");
  const double r2 = x.coords.squaredNorm();
  AmbientVector q(m + 1);
  q.head(m) = 2.0 * x.coords / (1.0 + r2);
  q[m] = (r2 - 1.0) / (r2 + 1.0);
  return SpherePoint(rotation_to(c).matrix() * q);
}

SpherePoint moebius(const SpherePoint& c, double s, const SpherePoint& p) {
  if (!(s > 0.0 && s <= 1.0)) throw DomainError("moebius: s outside (0, 1]");
  EuclideanPoint x = stereographic(c, p);
  x.coords *= s;
  return stereographic_inv(c, x);
}

SpherePoint zeta(double s, const SpherePoint& q) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("zeta: s outside [0, 1]");
  const int d = q.dim();
  require_pole_free(q, SpherePoint::north(d).v(), "zeta");
  require_pole_free(q, SpherePoint::south(d).v(), "zeta");
  return SpherePoint(to_eigen(maps::zeta(s, to_std(q.v()))));
}

AmbientVector tau(const SpherePoint& q) {
  const int d = q.dim();
  require_pole_free(q, SpherePoint::north(d).v(), "tau");
  require_pole_free(q, SpherePoint::south(d).v(), "tau");
  return to_eigen(maps::tau(to_std(q.v())));
}

AmbientVector dzeta(double s, const SpherePoint& q, const TangentVector& u) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("dzeta: s outside [0, 1]");
  const int d = q.dim();
  require_pole_free(q, SpherePoint::north(d).v(), "dzeta");
  require_pole_free(q, SpherePoint::south(d).v(), "dzeta");
  const Eigen::Index last = d - 1;
  const double qe = q[last];
  const double ue = u.dir()[last];
  AmbientVector w = q.v();
  w[last] -= s * qe;
  AmbientVector ushift = u.dir();
  ushift[last] -= s * ue;
  const double wn = w.norm();
  return ushift / wn + ((2.0 * s - s * s) * qe * ue / (wn * wn * wn)) * w;
}

EuclideanPoint central_projection(const SpherePoint& q) {
  const double last = q[q.dim() - 1];
  if (!(last <= -kPoleTolerance)) throw DomainError("central_projection: point not strictly southern");
  return {to_eigen(maps::central(to_std(q.v())))};
}

SpherePoint central_projection_inv(const EuclideanPoint& x) {
  return SpherePoint(to_eigen(maps::central_inverse(to_std(x.coords))));
}

Rotation rotation_to(const SpherePoint& c) {
  const int d = c.dim();
  const AmbientVector a = SpherePoint::south(d).v();
  const AmbientVector& b = c.v();
  const double cosang = a.dot(b);
  Matrix m;
  if (1.0 + cosang < 1e-12) {
    // c = e_{n+2}: half-turn in the (e_1, e_{n+2}) plane.
    m = Matrix::Identity(d, d);
    m(0, 0) = -1.0;
    m(d - 1, d - 1) = -1.0;
  } else {
    const Matrix k = b * a.transpose() - a * b.transpose();
    m = Matrix::Identity(d, d) + k + (k * k) / (1.0 + cosang);
  }
  return Rotation(m);
}

double angle_between(const AmbientVector& a, const AmbientVector& b) {
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

}  // namespace spherelab
