#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "spherelab/errors.hpp"
#include "spherelab/homotopy.hpp"
#include "spherelab/operators.hpp"

using namespace spherelab;
using std::numbers::pi;

namespace {

Rotation tilt() {
  Matrix m = Matrix::Identity(4, 4);
  m.bottomRightCorner(3, 3) = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 1, 2).normalized()).toRotationMatrix();
  return Rotation(m);
}

double max_pointwise(const Immersion& a, const Immersion& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.atlas().size(); ++i) worst = std::max(worst, (a.point(i) - b.point(i)).norm());
  return worst;
}

}  // namespace

TEST_CASE("normal translate track slides J linearly") {
  const Immersion f = family_round(2, pi / 3, tilt(), identity_diffeo(), 10);
  const Track t = track_normal_translate(f, uniform_grid(0.0, pi / 6));
  CHECK(t.complete);
  REQUIRE(t.steps.size() == kTrackSteps);
  for (const auto& s : t.steps) {
    CHECK(std::abs(s.j_mid - (pi / 3 - s.param)) < 1e-8);
    CHECK(s.j_width < 1e-8);
  }
  CHECK(std::abs(t.steps.back().j_mid - pi / 6) < 1e-8);
}

TEST_CASE("Clifford translate track stops at the principal radius") {
  const Track t = track_normal_translate(family_clifford(1, 1, 12), uniform_grid(0.0, pi / 4));
  CHECK_FALSE(t.complete);
  CHECK(t.failure.find("principal radius hit") != std::string::npos);
  CHECK(t.steps.size() == kTrackSteps - 1);
  const auto bracket = t.diagnostics["failure_bracket"];
  CHECK(std::abs(bracket[0].get<double>() - (pi / 4 - kRadiusMargin)) < 1e-6);
}

TEST_CASE("Moebius track increases the minimal curvature") {
  const Immersion f = family_radial_graph(2, pi / 4, 1e-2, RadialProfile::Cubic, 10);
  const Track t = track_moebius(f, decreasing_grid(0.2, 0.05));
  CHECK(t.complete);
  CHECK(t.diagnostics["mu_strictly_increasing"] == true);
  CHECK(t.steps.front().min_k == doctest::Approx(classify(f).min_kappa).epsilon(1e-12));
  CHECK(t.steps.back().min_k / t.steps.front().min_k > 3.0);
}

TEST_CASE("translate-Moebius track") {
  const Immersion f = family_radial_graph(2, pi / 4, 1e-2, RadialProfile::Quadric, 10);
  SUBCASE("s = 1 is constant") {
    const Track t = track_translate_moebius(f, 1.0, 6);
    CHECK(t.complete);
    for (const auto& snap : t.snapshots) CHECK(max_pointwise(snap, f) < 1e-8);
  }
  SUBCASE("s = 0.9 keeps radii above t") {
    const Track t = track_translate_moebius(f, 0.9, 8);
    CHECK(t.complete);
    CHECK(t.diagnostics["radii_exceed_t"] == true);
    const SpherePoint c = circumcenter(f.points()).center;
    CHECK(max_pointwise(t.snapshots.front(), apply_moebius(f, c, 0.9)) < 1e-12);
    CHECK(t.diagnostics["extended_endpoint_gap"].get<double>() < 1e-2);
  }
}

TEST_CASE("Euclidean straight line") {
  SUBCASE("round endpoints are stationary") {
    const Immersion phi = precompose(euclidean_sphere(2, 1.0, 10), squeeze_diffeo(1.5));
    const Track t = track_euclidean_straightline(phi, pi / 4);
    CHECK(t.complete);
    for (const auto& snap : t.snapshots) CHECK(max_pointwise(snap, phi) < 1e-12);
  }
  SUBCASE("projected round sphere reaches j_r o nu") {
    const Immersion f = family_round(2, pi / 4, Rotation::identity(4), identity_diffeo(), 10);
    const Immersion phi = central_project(f, Rotation::identity(4));
    const Track t = track_euclidean_straightline(phi, 0.6);
    for (std::size_t i = 0; i < phi.atlas().size(); ++i) {
      const AmbientVector nu = euclidean_shape_spectrum(phi, phi.atlas().samples()[i]).gauss;
      CHECK((t.snapshots.back().point(i) - std::tan(0.6) * nu).norm() < 1e-8);
    }
  }
  SUBCASE("projected radial graph stays negatively curved") {
    const Immersion f = family_radial_graph(2, 0.9, 3e-2, RadialProfile::Quadric, 10);
    const Track t = track_euclidean_straightline(central_project(f, Rotation::identity(4)), pi / 4);
    CHECK(t.complete);
    CHECK(t.steps.size() == kTrackSteps);
    CHECK(t.diagnostics["curvature_negative_throughout"] == true);
  }
  CHECK_THROWS_AS(track_euclidean_straightline(family_clifford(1, 1, 8), 0.5), DomainError);
}

TEST_CASE("deform to round") {
  SUBCASE("psi image is a fixed point") {
    const Immersion f = psi(tilt(), squeeze_diffeo(1.4), pi / 4, 10);
    const Track t = deform_to_round(f);
    CHECK(t.complete);
    CHECK(t.stages.front().last - t.stages.front().first == 1);
    for (const auto& snap : t.snapshots) CHECK(max_pointwise(snap, f) < 1e-8);
  }
  SUBCASE("radial graph") {
    const Immersion f = postcompose_rotation(family_radial_graph(2, pi / 4, 1e-2, RadialProfile::Cubic, 10), tilt());
    const Track t = deform_to_round(f);
    CHECK(t.complete);
    CHECK(t.diagnostics["convex_throughout"] == true);
    CHECK(t.diagnostics["endpoint_error"].get<double>() < 1e-5);
    CHECK(t.stage_gap < 1e-8);
  }
  SUBCASE("a wide cap needs the Moebius stage") {
    const Immersion f = family_radial_graph(2, 1.53, 1e-2, RadialProfile::Quadric, 10);
    const Track t = deform_to_round(f);
    CHECK(t.complete);
    CHECK(t.stages.front().last - t.stages.front().first > 1);
    CHECK(t.diagnostics["convex_throughout"] == true);
    CHECK(t.diagnostics["endpoint_error"].get<double>() < 1e-5);
    CHECK(t.stage_gap < 1e-8);
  }
}

TEST_CASE("zeta track") {
  SUBCASE("equatorial spheres are fixed") {
    const Immersion f = psi(tilt(), squeeze_diffeo(0.8), pi / 2, 10);
    const Track t = track_zeta(f, 5, false);
    CHECK(t.complete);
    for (const auto& snap : t.snapshots) CHECK(max_pointwise(snap, f) < 1e-12);
  }
  SUBCASE("round sphere") {
    const Immersion f = family_round(2, pi / 3, tilt(), identity_diffeo(), 16);
    const Track t = track_zeta(f);
    CHECK(t.complete);
    CHECK(t.steps.size() == kTrackSteps);
    CHECK(t.diagnostics["embedded_throughout"] == true);
    CHECK(t.diagnostics["gauss_in_hemisphere"] == true);
    CHECK(t.diagnostics["derivative_bound"] == true);
    CHECK(t.diagnostics["endpoint_error"].get<double>() < 1e-8);
  }
}

TEST_CASE("track log lines and monitor soundness") {
  const Immersion f = family_round(2, 1.0, Rotation::identity(4), identity_diffeo(), 8);
  const Track t = track_moebius(f, decreasing_grid(0.5, 0.25), true);
  std::ostringstream os;
  write_jsonl(os, t);
  std::istringstream is(os.str());
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) {
    const json j = json::parse(line);
    for (const char* key : {"stage", "step", "param", "min_k", "max_k", "J_mid", "J_width", "embedded", "rank_margin"})
      CHECK(j.contains(key));
    ++lines;
  }
  CHECK(lines == 3);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const TrackStep again = monitor_step(t.snapshots[i], true);
    CHECK(again.min_k == t.steps[i].min_k);
    CHECK(again.max_k == t.steps[i].max_k);
    CHECK(again.embedded == t.steps[i].embedded);
  }
}
