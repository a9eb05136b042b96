#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "spherelab/errors.hpp"
#include "spherelab/operators.hpp"
#include "spherelab/rigidity.hpp"

using namespace spherelab;
using std::numbers::pi;

namespace {

Rotation some_rotation() {
  Matrix m = Matrix::Identity(4, 4);
  m.topLeftCorner(3, 3) = Eigen::AngleAxisd(0.9, Eigen::Vector3d(1, 2, -1).normalized()).toRotationMatrix();
  Matrix t = Matrix::Identity(4, 4);
  t.block(2, 2, 2, 2) << std::cos(0.4), -std::sin(0.4), std::sin(0.4), std::cos(0.4);
  return Rotation(m * t);
}

// Largest number of samples with pairwise distinct domain points that share
// one image point, by comparing every pair.
int brute_force_multiplicity(const Immersion& f, double tol) {
  const auto pts = f.points();
  const DomainAtlas& atlas = f.atlas();
  int best = 1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int count = 1;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      if ((pts[i] - pts[j]).norm() < tol &&
          atlas.domain_distance(atlas.domain_point(i), atlas.domain_point(j)) > 1e-9) {
        ++count;
      }
    }
    best = std::max(best, count);
  }
  return best;
}

}  // namespace

TEST_CASE("round family is embedded across the radius grid") {
  for (double r : {0.3, pi / 4, 1.2, pi / 2, 2.5}) {
    const IntersectionReport rep = self_intersections(family_round(2, r, some_rotation(), identity_diffeo(), 24));
    CHECK(rep.embedded);
    CHECK(rep.m == 1);
    CHECK(rep.clusters.empty());
    CHECK(rep.suspects.empty());
    CHECK(rep.warnings.size() == 1);
  }
  CHECK(self_intersections(family_clifford(1, 1, 32)).embedded);
}

TEST_CASE("doubly wrapped Clifford torus and its dual have multiplicity 2") {
  const Immersion f = family_clifford(2, 1, 32);
  const IntersectionReport rep = self_intersections(f);
  CHECK_FALSE(rep.embedded);
  CHECK(rep.m == 2);
  CHECK(rep.m == brute_force_multiplicity(family_clifford(2, 1, 16), 1e-9));
  for (const auto& cluster : rep.clusters)
    for (const auto& p : cluster) CHECK(p.distance < kIntersectionEps);

  const IntersectionReport rotated = self_intersections(postcompose_rotation(f, some_rotation()));
  CHECK(rotated.m == rep.m);
  CHECK(rotated.clusters.size() == rep.clusters.size());

  const IntersectionReport star = dual_embedding_check(family_clifford(2, 1, 24));
  CHECK_FALSE(star.embedded);
  CHECK(star.m == 2);
  CHECK(star.m == brute_force_multiplicity(dual(family_clifford(2, 1, 16)), 1e-9));
  CHECK(brute_force_multiplicity(family_round(2, 0.7, Rotation::identity(4), identity_diffeo(), 8), 1e-9) == 1);
}

TEST_CASE("duals of convex spheres away from pi/2 are embedded") {
  CHECK(dual_embedding_check(family_round(2, pi / 6, Rotation::identity(4), identity_diffeo(), 24)).embedded);
  CHECK(dual_embedding_check(family_radial_graph(2, pi / 6, 1e-2, RadialProfile::Quadric, 24)).embedded);
}

TEST_CASE("report serializes under stable keys") {
  const json j = to_json(self_intersections(family_clifford(2, 1, 16)));
  CHECK(j["m"] == 2);
  CHECK(j["embedded"] == false);
  CHECK(j.contains("clusters"));
  CHECK(j.contains("warnings"));
}

TEST_CASE("deck groups") {
  const DeckGroup a = deck_antipodal(2);
  CHECK(a.order() == 2);
  const DeckGroup l = deck_lens(3, 1);
  CHECK(l.order() == 3);
  CHECK(deck_trivial(2).order() == 1);
  CHECK_THROWS_AS(deck_lens(4, 2), DomainError);
  CHECK_THROWS_AS(deck_antipodal(3), DomainError);
  CHECK(deck_from_string("lens:5,2", 2).order() == 5);
  CHECK_THROWS_AS(deck_from_string("dihedral", 2), SchemaError);

  // Not closed: a rotation by 2 pi / 3 without its square.
  Matrix g = Matrix::Identity(4, 4);
  g.topLeftCorner(2, 2) << std::cos(2 * pi / 3), -std::sin(2 * pi / 3), std::sin(2 * pi / 3), std::cos(2 * pi / 3);
  g.bottomRightCorner(2, 2) = g.topLeftCorner(2, 2);
  CHECK_THROWS_AS(make_deck_group("half", {Rotation::identity(4), Rotation(g)}), DomainError);
}

TEST_CASE("free-action validator agrees with the eigenvalue criterion") {
  auto eigen_free = [](const std::vector<Rotation>& els) {
    for (const auto& g : els) {
      if (g.matrix().isIdentity(1e-10)) continue;
      const Eigen::EigenSolver<Matrix> es(g.matrix());
      for (const auto& ev : es.eigenvalues())
        if (std::abs(ev - std::complex<double>(1.0, 0.0)) < 1e-9) return false;
    }
    return true;
  };
  std::vector<std::vector<Rotation>> cases;
  for (int p : {2, 3, 4, 5, 6})
    for (int q = 0; q < p; ++q) {
      std::vector<Rotation> els;
      for (int k = 0; k < p; ++k) {
        Matrix m = Matrix::Identity(4, 4);
        const double a = 2 * pi * k / p, b = 2 * pi * q * k / p;
        m.topLeftCorner(2, 2) << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        m.bottomRightCorner(2, 2) << std::cos(b), -std::sin(b), std::sin(b), std::cos(b);
        els.emplace_back(m);
      }
      cases.push_back(els);
    }
  cases.push_back({Rotation::identity(4), Rotation(-Matrix::Identity(4, 4))});
  for (const auto& els : cases) {
    const FreeActionReport r = validate_free_action(els, 2000);
    CHECK(r.free == eigen_free(els));
    CHECK(r.free == (r.min_displacement >= 1e-3));
  }
}

TEST_CASE("preimage components satisfy k |G_C| = |Gamma|") {
  const PreimageReport eq =
      preimage_components(family_round(2, pi / 2, Rotation::identity(4), identity_diffeo(), 24), deck_antipodal(2));
  CHECK(eq.k == 1);
  CHECK(eq.gc_order == 2);
  CHECK(eq.identity_holds);

  const PreimageReport cap =
      preimage_components(family_round(2, pi / 4, Rotation::identity(4), identity_diffeo(), 24), deck_antipodal(2));
  CHECK(cap.k == 2);
  CHECK(cap.gc_order == 1);
  CHECK(cap.identity_holds);

  const PreimageReport lens =
      preimage_components(family_round(2, 0.5, Rotation::identity(4), identity_diffeo(), 16), deck_lens(3, 1));
  CHECK(lens.k == 3);
  CHECK(lens.gc_order == 1);
  CHECK(lens.identity_holds);
  CHECK(to_json(lens)["gamma_order"] == 3);

  // Caps of radius 1.4 around -+e are 2 cos 1.4 apart: linking at that scale is ambiguous.
  CHECK_THROWS_AS(preimage_components(family_round(2, 1.4, Rotation::identity(4), identity_diffeo(), 16),
                                      deck_antipodal(2), 2 * std::cos(1.4)),
                  ResolutionError);
}

TEST_CASE("multiplicity bound") {
  const MultiplicityReport cap =
      multiplicity_bound_check(family_round(2, pi / 4, Rotation::identity(4), identity_diffeo(), 24), deck_antipodal(2));
  CHECK_FALSE(cap.skipped);
  CHECK(cap.m == 1);
  CHECK(cap.symmetry_order == 1);
  CHECK(cap.bound_holds);

  const MultiplicityReport eq =
      multiplicity_bound_check(family_round(2, pi / 2, Rotation::identity(4), identity_diffeo(), 24), deck_antipodal(2));
  CHECK(eq.m == 1);
  CHECK(eq.symmetry_order == 2);
  CHECK(eq.bound_holds);

  const MultiplicityReport skipped = multiplicity_bound_check(family_clifford(2, 1, 16), deck_trivial(2));
  CHECK(skipped.skipped);
  CHECK(skipped.reason.find("pi/2") != std::string::npos);
}

TEST_CASE("irreducible factor of wrapped tori") {
  const FactorReport a = irreducible_factor(family_clifford(1, 1, 16));
  CHECK(a.symmetry_order == 1);
  const FactorReport b = irreducible_factor(family_clifford(2, 1, 16));
  CHECK(b.symmetry_order == 2);
  CHECK(b.factor["wrap"] == json::array({1, 1}));
  const FactorReport c = irreducible_factor(family_clifford(2, 3, 16));
  CHECK(c.symmetry_order == 6);
  const FactorReport d = irreducible_factor(family_round(2, 0.4, Rotation::identity(4), identity_diffeo(), 8));
  CHECK(d.symmetry_order == 1);
}
