#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "spherelab/errors.hpp"
#include "spherelab/operators.hpp"

using namespace spherelab;
using std::numbers::pi;

namespace {

Rotation random_rotation(int d, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
  if (q.determinant() < 0) q.col(0) = -q.col(0);
  return Rotation(q);
}

double max_pointwise(const Immersion& a, const Immersion& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.atlas().size(); ++i) worst = std::max(worst, (a.point(i) - b.point(i)).norm());
  return worst;
}

// Every value of `want` is within tol of some value of `got` on the circle mod pi, and vice versa.
bool same_radii(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  auto covered = [tol](const std::vector<double>& a, const std::vector<double>& b) {
    return std::all_of(a.begin(), a.end(), [&](double x) {
      return std::any_of(b.begin(), b.end(), [&](double y) { return circle_distance(x, y) < tol; });
    });
  };
  return covered(got, want) && covered(want, got);
}

// Exact minimal enclosing cap of a few points on S^2: the best of all caps
// spanned by pairs (diametral) and triples (circumscribed) that cover every point.
double brute_force_cap_radius(const std::vector<AmbientVector>& pts) {
  double best = 1e300;
  auto consider = [&](AmbientVector c) {
    c.normalize();
    double r = 0.0;
    for (const auto& p : pts) r = std::max(r, std::acos(std::clamp(c.dot(p), -1.0, 1.0)));
    best = std::min(best, r);
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    consider(pts[i]);
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      consider(pts[i] + pts[j]);
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        Eigen::Vector3d n = (pts[j] - pts[i]).head<3>().cross((pts[k] - pts[i]).head<3>());
        if (n.norm() < 1e-14) continue;
        if (n.dot(pts[i].head<3>()) < 0) n = -n;
        consider(AmbientVector(n));
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("normal translate of iota_r is iota_{r - rho}") {
  for (double r : {pi / 3, 2.0}) {
    for (double rho : {pi / 6, -0.4, 0.25}) {
      const Immersion f = family_round(2, r, Rotation::identity(4), identity_diffeo(), 12);
      const Immersion g = family_round(2, r - rho, Rotation::identity(4), identity_diffeo(), 12);
      CHECK(max_pointwise(normal_translate(f, rho), g) < 1e-10);
    }
  }
}

TEST_CASE("radii shift law, Gauss of translate and composition law") {
  const std::vector<Immersion> fs = {family_round(2, pi / 3, Rotation::identity(4), identity_diffeo(), 12),
                                     family_clifford(1, 1, 16), family_radial_graph(2, pi / 4, 1e-2,
                                                                                    RadialProfile::Quadric, 12)};
  const std::vector<double> rs = {0.1, 0.3, -0.5, 1.0, 2.0};
  for (const auto& f : fs) {
    const auto spec = spectrum(f);
    for (double r : rs) {
      const Immersion fr = normal_translate(f, r, spec);
      const auto spec_r = spectrum(fr);
      const int l = translate_l(spec, r);
      const double sign = l % 2 == 0 ? 1.0 : -1.0;
      CHECK(fr.provenance()["l"] == l);
      for (std::size_t i = 0; i < spec.size(); ++i) {
        std::vector<double> want;
        for (double rho : spec[i].radii) want.push_back(mod_pi(sign * (rho - r)));
        CHECK(same_radii(spec_r[i].radii, want, 1e-6));
        const AmbientVector nu = gauss_vector(f, spec[i].x);
        const AmbientVector expect = sign * (std::cos(r) * nu - std::sin(r) * f.point(i));
        CHECK((spec_r[i].gauss - expect).norm() < 1e-8);
      }
      const double r2 = 0.2;
      const Immersion lhs = normal_translate(f, r + r2, spec);
      const Immersion rhs = normal_translate(fr, sign * r2, spec_r);
      CHECK(max_pointwise(lhs, rhs) < 1e-8);
    }
  }
}

TEST_CASE("translating the Clifford torus by a principal radius fails") {
  const Immersion f = family_clifford(1, 1, 16);
  CHECK_THROWS_WITH_AS(normal_translate(f, pi / 4), doctest::Contains("principal radius hit"), DegeneracyError);
  CHECK_THROWS_AS(normal_translate(f, 3 * pi / 4), DegeneracyError);
  CHECK_NOTHROW(normal_translate(f, pi / 4 - 1e-2));
}

TEST_CASE("dual: curvature inversion, double dual and the interval law") {
  const std::vector<Immersion> fs = {family_round(2, pi / 6, Rotation::identity(4), identity_diffeo(), 12),
                                     family_round(2, 2.2, random_rotation(4, 3), identity_diffeo(), 12),
                                     family_clifford(1, 1, 16),
                                     family_radial_graph(2, pi / 4, 1e-2, RadialProfile::Cubic, 12)};
  for (const auto& f : fs) {
    const auto spec = spectrum(f);
    const Immersion fs1 = dual(f, spec);
    const auto spec_star = spectrum(fs1);
    const int l = spec.front().l_count;
    const double sign = (l + 1) % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      CHECK((fs1.point(i) - spec[i].gauss).norm() < 1e-14);
      std::vector<double> want;
      for (double k : spec[i].kappas) want.push_back(sign / k);
      std::sort(want.begin(), want.end());
      for (std::size_t j = 0; j < want.size(); ++j) {
        CHECK(std::abs(spec_star[i].kappas[j] - want[j]) <= 1e-6 * std::max(1.0, std::abs(want[j])));
      }
    }
    CHECK(max_pointwise(dual(fs1, spec_star), postcompose_rotation(f, Rotation(sign * Matrix::Identity(4, 4)))) <
          1e-8);
    const RadiiInterval jf = radii_interval(spec);
    // A width-pi/2 cover is not unique; the radii law above already covers it.
    if (jf.non_unique) continue;
    const CircleInterval j = jf.interval;
    const CircleInterval js = radii_interval(spec_star).interval;
    const bool minus = circle_distance(js.lo(), pi / 2 - j.hi()) < 1e-6 && circle_distance(js.hi(), pi / 2 - j.lo()) < 1e-6;
    const bool plus = circle_distance(js.lo(), pi / 2 + j.lo()) < 1e-6 && circle_distance(js.hi(), pi / 2 + j.hi()) < 1e-6;
    CHECK((minus || plus));
  }
  // Round dual: radii pi/2 - r or pi/2 + r.
  const auto round_star = spectrum(dual(fs[0]));
  for (const auto& c : round_star) {
    for (double rho : c.radii) {
      CHECK(std::min(circle_distance(rho, pi / 2 - pi / 6), circle_distance(rho, pi / 2 + pi / 6)) < 1e-8);
    }
  }
  // Clifford dual is again a +-1 torus.
  for (const auto& c : spectrum(dual(fs[2]))) {
    CHECK(std::abs(c.kappas[0] + 1) < 1e-8);
    CHECK(std::abs(c.kappas[1] - 1) < 1e-8);
  }
}

TEST_CASE("dual of a totally geodesic sphere fails at a flat point") {
  const Immersion eq = family_round(2, pi / 2, Rotation::identity(4), identity_diffeo(), 8);
  CHECK_THROWS_WITH_AS(dual(eq), doctest::Contains("flat point"), DegeneracyError);
}

TEST_CASE("hemisphere locus for convex immersions") {
  const std::vector<Immersion> fs = {family_radial_graph(2, pi / 4, 1e-2, RadialProfile::Quadric, 16),
                                     family_round(2, pi / 3, random_rotation(4, 5), identity_diffeo(), 16),
                                     family_radial_graph(2, pi / 5, 2e-2, RadialProfile::Cubic, 16)};
  for (const auto& f : fs) {
    REQUIRE(classify(f).locally_convex);
    const Immersion fstar = dual(f);
    const Circumcap cap = circumcenter(f.points());
    double worst = 1e300;
    for (const auto& x : f.atlas().samples()) {
      for (int k = 0; k <= 8; ++k) {
        const double t = pi / 2 * k / 8;
        worst = std::min(worst, cap.center.v().dot(hemisphere_locus(f, fstar, x, t)));
      }
    }
    CHECK(worst > 0.0);
    CHECK((hemisphere_locus(f, fstar, f.atlas().samples()[7], 0.0) - f.point(7)).norm() < 1e-15);
    CHECK((hemisphere_locus(f, fstar, f.atlas().samples()[7], pi / 2) - fstar.point(7)).norm() < 1e-15);
    const auto p = f.points(), q = fstar.points();
    double pair_min = 1e300;
    for (const auto& a : p)
      for (const auto& b : q) pair_min = std::min(pair_min, a.dot(b));
    CHECK(pair_min >= -1e-9);
  }
}

TEST_CASE("circumcenter") {
  const Immersion f = family_round(2, 0.7, Rotation::identity(4), identity_diffeo(), 16);
  const Circumcap cap = circumcenter(f.points());
  CHECK((cap.center.v() - SpherePoint::south(4).v()).norm() < 1e-6);
  CHECK(std::abs(cap.radius - 0.7) < 1e-6);

  const AmbientVector p = SpherePoint::basis(4, 2).v();
  const Circumcap single = circumcenter({p});
  CHECK((single.center.v() - p).norm() < 1e-15);
  CHECK(single.radius == 0.0);

  const double alpha = 0.6;
  const AmbientVector a = (AmbientVector(4) << std::cos(alpha), std::sin(alpha), 0, 0).finished();
  const AmbientVector b = (AmbientVector(4) << std::cos(alpha), -std::sin(alpha), 0, 0).finished();
  const Circumcap two = circumcenter({a, b});
  CHECK((two.center.v() - SpherePoint::basis(4, 0).v()).norm() < 1e-12);
  CHECK(std::abs(two.radius - alpha) < 1e-12);

  // Random clouds in a cap of S^2 against the combinatorial oracle.
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<AmbientVector> pts;
    for (int k = 0; k < 9; ++k) {
      AmbientVector v(3);
      v << g(rng), g(rng), 2.0 + std::abs(g(rng));
      pts.push_back(v.normalized());
    }
    const Circumcap c = circumcenter(pts);
    CHECK(std::abs(c.radius - brute_force_cap_radius(pts)) < 1e-9);
    for (const auto& q : pts) CHECK(angle_between(c.center.v(), q) <= c.radius + 1e-8);
  }

  const Immersion eq = family_round(2, pi / 2, Rotation::identity(4), identity_diffeo(), 8);
  CHECK_THROWS_WITH_AS(circumcenter(eq.points()), doctest::Contains("not hemispherical"), HypothesisError);
}

TEST_CASE("Moebius monitor on a round sphere follows the cap radius") {
  const Immersion f = family_round(2, pi / 4, Rotation::identity(4), identity_diffeo(), 12);
  const MoebiusMonitor mon = moebius_flow_monitor(f, decreasing_grid(0.2, 0.2));
  REQUIRE(mon.steps.size() == 5);
  CHECK(mon.strictly_increasing);
  CHECK(std::abs(mon.steps.front().mu - 1.0) < 1e-8);
  for (const auto& step : mon.steps) {
    const Circumcap cap = circumcenter(apply_moebius(f, mon.center, step.s).points());
    CHECK(std::abs(step.mu - 1.0 / std::tan(cap.radius)) < 1e-6);
  }
  CHECK(mon.steps.back().mu / mon.steps.front().mu > 3.0);
}

TEST_CASE("Moebius monitor on a radial graph") {
  const Immersion f = family_radial_graph(2, pi / 4, 1e-2, RadialProfile::Quadric, 10);
  const MoebiusMonitor mon = moebius_flow_monitor(f, decreasing_grid(0.2, 0.05));
  CHECK(mon.steps.size() == 17);
  CHECK(mon.strictly_increasing);
  CHECK(std::abs(mon.steps.front().mu - classify(f).min_kappa) < 1e-12);
  CHECK_THROWS_AS(moebius_flow_monitor(family_clifford(1, 1, 8), {1.0}), HypothesisError);
}

TEST_CASE("psi has the expected centre and radii") {
  const Rotation q = random_rotation(4, 7);
  const Immersion f = psi(q, squeeze_diffeo(1.8), 0.9, 12);
  const Circumcap cap = circumcenter(f.points());
  CHECK((cap.center.v() - q(SpherePoint::south(4)).v()).norm() < 1e-6);
  for (const auto& c : spectrum(f)) CHECK(std::abs(c.radii[0] - 0.9) + std::abs(c.radii[1] - 0.9) < 1e-8);
  const Immersion id = psi(Rotation::identity(4), identity_diffeo(), pi / 4, 12);
  CHECK(max_pointwise(id, family_round(2, pi / 4, Rotation::identity(4), identity_diffeo(), 12)) == 0.0);
}

TEST_CASE("Phi o Psi and Phi-bar o Psi-bar are the identity on canonical classes") {
  const DomainAtlas atlas = DomainAtlas::sphere(2, 12);
  const std::vector<DiffeoPtr> gs = {identity_diffeo(), squeeze_diffeo(1.6), squeeze_diffeo(0.5),
                                     compose(squeeze_diffeo(1.3), rotation_diffeo(random_rotation(3, 2)))};
  for (std::size_t k = 0; k < gs.size(); ++k) {
    const Rotation q = random_rotation(4, 20 + static_cast<unsigned>(k));
    const TwistedClass want = canonicalize(q, gs[k]);
    const PhiResult conv = phi_convex(psi(q, gs[k], 0.3 + 0.3 * k, 12));
    const TwistedDistance d1 = twisted_distance(conv.cls, want, atlas);
    CHECK(d1.rotation < 1e-6);
    CHECK(d1.diffeo < 1e-6);
    CHECK(conv.min_jacobian_det > 0.0);
    const PhiResult hemi = phi_hemi(psi(q, gs[k], pi / 2, 12));
    const TwistedDistance d2 = twisted_distance(hemi.cls, want, atlas);
    CHECK(d2.rotation < 1e-6);
    CHECK(d2.diffeo < 1e-6);
  }
}

TEST_CASE("phi_hemi of a round sphere and the zeta endpoint") {
  const Rotation q = random_rotation(4, 9);
  const Immersion f = family_round(2, pi / 3, q, identity_diffeo(), 12);
  const PhiResult res = phi_hemi(f);
  CHECK((res.cls.q(SpherePoint::south(4)).v() - q(SpherePoint::south(4)).v()).norm() < 1e-8);
  CHECK(std::abs(res.cap.radius - pi / 6) < 1e-6);
  CHECK(res.min_jacobian_det > 0.0);
  const Immersion end = zeta_conjugate(f, res.cls.q, 1.0);
  CHECK(max_pointwise(end, psi(res.cls.q, res.cls.g, pi / 2, 12)) < 1e-8);
  CHECK(max_pointwise(zeta_conjugate(f, res.cls.q, 0.0), f) < 1e-15);
  CHECK_THROWS_AS(phi_hemi(family_clifford(1, 1, 8)), DomainError);
}

TEST_CASE("canonical representative absorbs the block rotation") {
  Matrix block = Matrix::Identity(4, 4);
  block.topLeftCorner(3, 3) = Eigen::AngleAxisd(0.8, Eigen::Vector3d(0.3, 1, -1).normalized()).toRotationMatrix();
  const Rotation q = random_rotation(4, 4);
  const TwistedClass a = canonicalize(q, identity_diffeo());
  const TwistedClass b = canonicalize(q * Rotation(block),
                                      rotation_diffeo(Rotation(Matrix(block.topLeftCorner(3, 3).transpose()))));
  const TwistedDistance d = twisted_distance(a, b, DomainAtlas::sphere(2, 8));
  CHECK(d.rotation < 1e-12);
  CHECK(d.diffeo < 1e-12);
}
