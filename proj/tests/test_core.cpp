#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "spherelab/errors.hpp"
#include "spherelab/jet.hpp"
#include "spherelab/sphere_core.hpp"

using namespace spherelab;
using std::numbers::pi;

namespace {

AmbientVector random_unit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  AmbientVector v(d);
  for (int i = 0; i < d; ++i) v[i] = g(rng);
  return v.normalized();
}

}  // namespace

TEST_CASE("jet arithmetic matches hand derivatives") {
  const Jet x = Jet::variable(0.3, 0, 2, 4);
  const Jet y = Jet::variable(-0.7, 1, 2, 4);
  const Jet f = sin(x) * cos(y) + sqrt(x * x + y * y + 1.0) / (x + 2.0);
  const double r = std::sqrt(0.09 + 0.49 + 1.0);
  const double fx = std::cos(0.3) * std::cos(-0.7) + (0.3 / r) / 2.3 - r / (2.3 * 2.3);
  CHECK(f.partial(0) == doctest::Approx(fx).epsilon(1e-13));
  // Mixed second partial by central differences of the first partial.
  auto fx_at = [](double a, double b) {
    const Jet xa = Jet::variable(a, 0, 2, 2);
    const Jet yb = Jet::variable(b, 1, 2, 2);
    return (sin(xa) * cos(yb) + sqrt(xa * xa + yb * yb + 1.0) / (xa + 2.0)).partial(0);
  };
  const double h = 1e-5;
  const double fxy = (fx_at(0.3, -0.7 + h) - fx_at(0.3, -0.7 - h)) / (2 * h);
  CHECK(f.second(0, 1) == doctest::Approx(fxy).epsilon(1e-8));
  CHECK(f.second(1, 0) == doctest::Approx(f.second(0, 1)));
}

TEST_CASE("jet derivative lowers order and tan matches sin/cos") {
  const Jet x = Jet::variable(0.4, 0, 1, 8);
  const Jet t = tan(x);
  const Jet q = sin(x) / cos(x);
  for (int k = 0; k < t.size(); ++k) CHECK(t.coeff(k) == doctest::Approx(q.coeff(k)).epsilon(1e-12));
  const Jet d = t.derivative(0);
  CHECK(d.order() == 7);
  CHECK(d.value() == doctest::Approx(1.0 / (std::cos(0.4) * std::cos(0.4))));
  CHECK(max_jet_order(2) >= 6);
}

TEST_CASE("exp_sphere trivial cases") {
  const int d = 4;
  const SpherePoint e1 = SpherePoint::basis(d, 0);
  const SpherePoint e2 = SpherePoint::basis(d, 1);
  CHECK((exp_sphere(e1, TangentVector(e1, AmbientVector::Zero(d))).v() - e1.v()).norm() < 1e-15);
  CHECK((exp_sphere(e1, TangentVector(e1, pi / 2 * e2.v())).v() - e2.v()).norm() < 1e-15);
  CHECK((exp_sphere(e1, TangentVector(e1, pi * e2.v())).v() + e1.v()).norm() < 1e-15);
}

TEST_CASE("exp_sphere flow in a plane has period 2 pi") {
  const int d = 4;
  SpherePoint p = SpherePoint::basis(d, 0);
  AmbientVector v = SpherePoint::basis(d, 2).v();
  for (int k = 0; k < 4; ++k) {
    const SpherePoint q = exp_sphere(p, TangentVector(p, pi / 2 * v));
    v = -p.v();
    p = q;
  }
  CHECK((p.v() - SpherePoint::basis(d, 0).v()).norm() < 1e-9);
}

TEST_CASE("iota_r evaluations and domain errors") {
  AmbientVector p = AmbientVector::Zero(4);
  p[0] = 1.0;
  CHECK((iota_r(pi / 2, p).v() - p).norm() < 1e-15);
  const SpherePoint q = iota_r(pi / 4, p);
  CHECK(q[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(q[3] == doctest::Approx(-std::sqrt(0.5)));
  CHECK_THROWS_AS(iota_r(0.0, p), DomainError);
  CHECK_THROWS_AS(iota_r(pi, p), DomainError);
}

TEST_CASE("stereographic round trip, pole and metric factor") {
  std::mt19937_64 rng(7);
  const int d = 4;
  for (int k = 0; k < 200; ++k) {
    const SpherePoint c(random_unit(rng, d));
    const SpherePoint p(random_unit(rng, d));
    CHECK((stereographic_inv(c, stereographic(c, p)).v() - p.v()).norm() < 1e-10);
    CHECK(stereographic(c, c).coords.norm() < 1e-12);
  }
  const SpherePoint c(random_unit(rng, d));
  CHECK_THROWS_AS(stereographic(c, SpherePoint(-c.v())), PoleError);
  // Pullback metric of the inverse is 4 / (1 + |x|^2)^2 times the identity.
  AmbientVector x(3);
  x << 0.3, -0.8, 0.5;
  const double h = 1e-6;
  Matrix jac(d, 3);
  for (int i = 0; i < 3; ++i) {
    AmbientVector a = x, b = x;
    a[i] += h;
    b[i] -= h;
    jac.col(i) = (stereographic_inv(c, {a}).v() - stereographic_inv(c, {b}).v()) / (2 * h);
  }
  const double factor = 4.0 / std::pow(1.0 + x.squaredNorm(), 2);
  const Matrix gram = jac.transpose() * jac;
  CHECK((gram - factor * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("moebius identities") {
  std::mt19937_64 rng(11);
  const int d = 4;
  std::uniform_real_distribution<double> us(0.05, 1.0);
  for (int k = 0; k < 300; ++k) {
    const SpherePoint c(random_unit(rng, d));
    const SpherePoint p(random_unit(rng, d));
    const double s = us(rng);
    CHECK(std::abs(moebius(c, s, p).v().norm() - 1.0) < 1e-10);
    CHECK((moebius(c, 1.0, p).v() - p.v()).norm() < 1e-12);
  }
  const SpherePoint n = SpherePoint::north(d);
  CHECK((moebius(n, 0.3, n).v() - n.v()).norm() < 1e-12);
  CHECK_THROWS_AS(moebius(n, 0.0, n), DomainError);
}

TEST_CASE("zeta and tau") {
  std::mt19937_64 rng(5);
  const int d = 4;
  for (int k = 0; k < 100; ++k) {
    const SpherePoint q(random_unit(rng, d));
    CHECK((zeta(0.0, q).v() - q.v()).norm() < 1e-15);
    const SpherePoint z1 = zeta(1.0, q);
    CHECK(std::abs(z1[d - 1]) < 1e-15);
    CHECK((z1.v().head(d - 1) - tau(q)).norm() < 1e-15);
    AmbientVector eq = q.v();
    eq[d - 1] = 0.0;
    const SpherePoint qe(eq);
    CHECK((zeta(0.6, qe).v() - qe.v()).norm() < 1e-15);
  }
  CHECK_THROWS_AS(zeta(0.5, SpherePoint::north(d)), PoleError);
  CHECK_THROWS_AS(zeta(0.5, SpherePoint::south(d)), PoleError);
}

TEST_CASE("dzeta matches finite differences") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> us(0.0, 1.0);
  const int d = 4;
  int checked = 0;
  for (int k = 0; k < 1000; ++k) {
    const SpherePoint q(random_unit(rng, d));
    if (std::abs(std::abs(q[d - 1]) - 1.0) < 1e-3) continue;
    const TangentVector u = TangentVector::project(q, random_unit(rng, d));
    const double s = us(rng);
    const double h = 1e-6;
    const AmbientVector fd = (zeta(s, SpherePoint(q.v() + h * u.dir())).v() -
                              zeta(s, SpherePoint(q.v() - h * u.dir())).v()) /
                             (2 * h);
    const AmbientVector cf = dzeta(s, q, u);
    CHECK((fd - cf).norm() <= 1e-6 * std::max(1.0, cf.norm()));
    ++checked;
  }
  CHECK(checked > 900);
  const SpherePoint q(random_unit(rng, d));
  const TangentVector u = TangentVector::project(q, random_unit(rng, d));
  CHECK((dzeta(0.0, q, u) - u.dir()).norm() < 1e-14);
}

TEST_CASE("central projection") {
  const int d = 4;
  CHECK(central_projection(SpherePoint::south(d)).coords.norm() < 1e-15);
  AmbientVector p = AmbientVector::Zero(d);
  p[1] = 1.0;
  const EuclideanPoint x = central_projection(iota_r(pi / 4, p));
  CHECK((x.coords - p.head(3)).norm() < 1e-12);
  CHECK((central_projection_inv(x).v() - iota_r(pi / 4, p).v()).norm() < 1e-12);
  CHECK_THROWS_AS(central_projection(SpherePoint::north(d)), DomainError);
  CHECK_THROWS_AS(central_projection(SpherePoint(p)), DomainError);
}

TEST_CASE("rotation_to") {
  std::mt19937_64 rng(17);
  const int d = 4;
  CHECK(rotation_to(SpherePoint::south(d)).matrix().isIdentity(1e-15));
  Matrix block = Matrix::Identity(d, d);
  block.topLeftCorner(3, 3) = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  const AmbientVector e = SpherePoint::north(d).v();
  for (int k = 0; k < 200; ++k) {
    const SpherePoint c(random_unit(rng, d));
    const Rotation q = rotation_to(c);
    CHECK((q(SpherePoint::south(d)).v() - c.v()).norm() < 1e-10);
    CHECK(q.matrix() == rotation_to(c).matrix());
    // Another valid choice differs from q by a rotation fixing e_{n+2}.
    const Rotation other = q * Rotation(block);
    CHECK((other(SpherePoint::south(d)).v() - c.v()).norm() < 1e-10);
    CHECK((q.inverse() * other)(e).isApprox(e, 1e-10));
  }
  const Rotation qn = rotation_to(SpherePoint::north(d));
  CHECK((qn(SpherePoint::south(d)).v() - SpherePoint::north(d).v()).norm() < 1e-10);
}
