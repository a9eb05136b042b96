#include "spherelab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "spherelab/curvature.hpp"
#include "spherelab/errors.hpp"
#include "spherelab/homotopy.hpp"
#include "spherelab/operators.hpp"
#include "spherelab/rigidity.hpp"

namespace spherelab {
namespace {

using std::numbers::pi;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Rotation random_rotation(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
  if (q.determinant() < 0) q.col(0) = -q.col(0);
  return Rotation(q);
}

AmbientVector random_unit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  AmbientVector v(d);
  for (int i = 0; i < d; ++i) v[i] = g(rng);
  return v.normalized();
}

double max_pointwise(const Immersion& a, const Immersion& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.atlas().size(); ++i) worst = std::max(worst, (a.point(i) - b.point(i)).norm());
  return worst;
}

// Largest distance from a radius in one list to the nearest radius of the other, mod pi.
double radii_mismatch(const std::vector<double>& got, const std::vector<double>& want) {
  auto one_way = [](const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (double x : a) {
      double best = 1e300;
      for (double y : b) best = std::min(best, circle_distance(x, y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(got, want), one_way(want, got));
}

// Most samples with distinct domain points sharing one image point, by comparing every pair.
int brute_force_multiplicity(const Immersion& f, double tol) {
  const auto pts = f.points();
  const DomainAtlas& atlas = f.atlas();
  int best = 1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int count = 1;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i && (pts[i] - pts[j]).norm() < tol &&
          atlas.domain_distance(atlas.domain_point(i), atlas.domain_point(j)) > 1e-9)
        ++count;
    }
    best = std::max(best, count);
  }
  return best;
}

Immersion round(double r, const Rotation& q, int res) { return family_round(2, r, q, identity_diffeo(), res); }

std::vector<Immersion> convex_builtins(int res, std::mt19937_64& rng) {
  return {family_radial_graph(2, pi / 4, 1e-2, RadialProfile::Quadric, res),
          round(pi / 3, random_rotation(4, rng), res),
          family_radial_graph(2, pi / 5, 2e-2, RadialProfile::Cubic, res)};
}

using Check = void (*)(CriterionResult&, const VerifyOptions&, std::mt19937_64&);

void calibration(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64& rng) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (double r : {pi / 6, pi / 4, pi / 3, 0.45 * pi}) {
    for (const auto& s : spectrum(round(r, random_rotation(4, rng), opt.resolution)))
      for (double k : s.kappas) worst = std::max(worst, std::abs(k - 1.0 / std::tan(r)));
  }
  const double t = seconds_since(t0);
  c.detail = {{"max_kappa_error", worst}, {"tolerance", 1e-8}, {"runtime_s", t}, {"budget_s", 5.0}};
  c.pass = worst <= 1e-8 && t < 5.0;
}

void clifford_data(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64&) {
  const auto spec = spectrum(family_clifford(1, 1, opt.resolution));
  double worst = 0.0;
  for (const auto& s : spec)
    worst = std::max({worst, std::abs(s.kappas[0] + 1.0), std::abs(s.kappas[1] - 1.0)});
  const CircleInterval j = radii_interval(spec).interval;
  const double j_err = std::max(circle_distance(j.lo(), pi / 4), circle_distance(j.hi(), 3 * pi / 4));
  c.detail = {{"max_kappa_error", worst}, {"J", {j.lo(), j.hi()}}, {"J_error", j_err}};
  c.pass = worst <= 1e-8 && j_err <= 1e-6;
}

std::vector<Immersion> translate_families(int res) {
  return {round(pi / 3, Rotation::identity(4), res), family_clifford(1, 1, res),
          family_radial_graph(2, pi / 4, 1e-2, RadialProfile::Quadric, res)};
}

void radii_shift(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64&) {
  double radii_err = 0.0, comp_err = 0.0;
  int cases = 0;
  for (const auto& f : translate_families(opt.resolution)) {
    const auto spec = spectrum(f);
    for (double r : {0.1, 0.3, -0.5, 1.0, 2.0}) {
      const Immersion fr = normal_translate(f, r, spec);
      const auto spec_r = spectrum(fr);
      const double sign = translate_l(spec, r) % 2 == 0 ? 1.0 : -1.0;
      for (std::size_t i = 0; i < spec.size(); ++i) {
        std::vector<double> want;
        for (double rho : spec[i].radii) want.push_back(mod_pi(sign * (rho - r)));
        radii_err = std::max(radii_err, radii_mismatch(spec_r[i].radii, want));
      }
      const double r2 = 0.2;
      comp_err = std::max(comp_err, max_pointwise(normal_translate(f, r + r2, spec),
                                                  normal_translate(fr, sign * r2, spec_r)));
      ++cases;
    }
  }
  c.detail = {{"cases", cases}, {"max_radii_error", radii_err}, {"radii_tolerance", 1e-6},
              {"max_composition_error", comp_err}, {"composition_tolerance", 1e-8}};
  c.pass = radii_err <= 1e-6 && comp_err <= 1e-8;
}

void gauss_of_translate(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64&) {
  double worst = 0.0;
  std::size_t samples = 0;
  for (const auto& f : translate_families(opt.resolution)) {
    const auto spec = spectrum(f);
    for (double r : {0.3, -0.5}) {
      const double sign = translate_l(spec, r) % 2 == 0 ? 1.0 : -1.0;
      const auto spec_r = spectrum(normal_translate(f, r, spec));
      for (std::size_t i = 0; i < spec.size(); ++i) {
        const AmbientVector expect = sign * (std::cos(r) * spec[i].gauss - std::sin(r) * spec[i].point);
        worst = std::max(worst, (spec_r[i].gauss - expect).norm());
      }
      samples += spec.size();
    }
  }
  c.detail = {{"samples", samples}, {"max_error", worst}, {"tolerance", 1e-8}};
  c.pass = worst <= 1e-8;
}

void dual_laws(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64& rng) {
  const int res = opt.resolution;
  const std::vector<Immersion> fs = {round(pi / 6, Rotation::identity(4), res),
                                     round(2.2, random_rotation(4, rng), res), family_clifford(1, 1, res),
                                     family_radial_graph(2, pi / 4, 1e-2, RadialProfile::Cubic, res)};
  double inv_err = 0.0, dd_err = 0.0, j_err = 0.0;
  int interval_cases = 0;
  for (const auto& f : fs) {
    const auto spec = spectrum(f);
    const Immersion fs1 = dual(f, spec);
    const auto spec_star = spectrum(fs1);
    const double sign = (spec.front().l_count + 1) % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      std::vector<double> want;
      for (double k : spec[i].kappas) want.push_back(sign / k);
      std::sort(want.begin(), want.end());
      for (std::size_t j = 0; j < want.size(); ++j)
        inv_err = std::max(inv_err, std::abs(spec_star[i].kappas[j] - want[j]) / std::max(1.0, std::abs(want[j])));
    }
    dd_err = std::max(dd_err, max_pointwise(dual(fs1, spec_star),
                                            postcompose_rotation(f, Rotation(sign * Matrix::Identity(4, 4)))));
    const RadiiInterval jf = radii_interval(spec);
    // A cover of width pi/2 is not unique, so only the radii themselves are compared there.
    if (jf.non_unique) continue;
    const CircleInterval j = jf.interval, js = radii_interval(spec_star).interval;
    const double minus = std::max(circle_distance(js.lo(), pi / 2 - j.hi()), circle_distance(js.hi(), pi / 2 - j.lo()));
    const double plus = std::max(circle_distance(js.lo(), pi / 2 + j.lo()), circle_distance(js.hi(), pi / 2 + j.hi()));
    j_err = std::max(j_err, std::min(minus, plus));
    ++interval_cases;
  }
  c.detail = {{"max_relative_inversion_error", inv_err}, {"max_double_dual_error", dd_err},
              {"max_interval_error", j_err}, {"interval_cases", interval_cases}};
  c.pass = inv_err <= 1e-6 && dd_err <= 1e-8 && j_err <= 1e-6;
}

void hemisphere(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64& rng) {
  double locus_min = 1e300, pair_min = 1e300;
  for (const auto& f : convex_builtins(opt.resolution, rng)) {
    const Immersion fstar = dual(f);
    const SpherePoint center = circumcenter(f.points()).center;
    for (const auto& x : f.atlas().samples())
      for (int k = 0; k <= 8; ++k)
        locus_min = std::min(locus_min, center.v().dot(hemisphere_locus(f, fstar, x, pi / 2 * k / 8)));
    const auto p = f.points(), q = fstar.points();
    Matrix a(4, p.size()), b(4, q.size());
    for (std::size_t i = 0; i < p.size(); ++i) a.col(i) = p[i];
    for (std::size_t i = 0; i < q.size(); ++i) b.col(i) = q[i];
    for (std::size_t i = 0; i < p.size(); ++i) pair_min = std::min(pair_min, (b.transpose() * a.col(i)).minCoeff());
  }
  c.detail = {{"min_center_product", locus_min}, {"min_pair_product", pair_min}, {"pair_tolerance", -1e-9}};
  c.pass = locus_min > 0.0 && pair_min >= -1e-9;
}

void moebius(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64& rng) {
  c.pass = true;
  c.detail["families"] = json::array();
  for (const auto& f : convex_builtins(opt.resolution, rng)) {
    const MoebiusMonitor mon = moebius_flow_monitor(f, decreasing_grid(0.2, 0.05));
    const double ratio = mon.steps.back().mu / mon.steps.front().mu;
    c.detail["families"].push_back({{"family", f.provenance()["family"]},
                                    {"strictly_increasing", mon.strictly_increasing},
                                    {"mu_ratio", ratio}});
    c.pass = c.pass && mon.strictly_increasing && ratio > 3.0;
  }
}

void zeta_bound(CriterionResult& c, const VerifyOptions&, std::mt19937_64& rng) {
  const int d = 4;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double fd_err = 0.0;
  int fd_cases = 0;
  while (fd_cases < 1000) {
    const SpherePoint q(random_unit(rng, d));
    if (std::abs(std::abs(q[d - 1]) - 1.0) < 1e-3) continue;
    const TangentVector u = TangentVector::project(q, random_unit(rng, d));
    const double s = unit(rng), h = 1e-6;
    const AmbientVector fd =
        (zeta(s, SpherePoint(q.v() + h * u.dir())).v() - zeta(s, SpherePoint(q.v() - h * u.dir())).v()) / (2 * h);
    const AmbientVector cf = dzeta(s, q, u);
    fd_err = std::max(fd_err, (fd - cf).norm() / std::max(1.0, cf.norm()));
    ++fd_cases;
  }
  // Triples: v within angle r of -e_{n+2}, then q, u orthonormal and orthogonal to v.
  const AmbientVector e = SpherePoint::north(d).v();
  double slack = 1e300;
  for (int k = 0; k < 1000; ++k) {
    const double r = unit(rng) * (pi / 2 - 1e-3);
    const double theta = unit(rng) * r;
    AmbientVector w = random_unit(rng, d);
    w = (w - w.dot(e) * e).normalized();
    const AmbientVector v = -std::cos(theta) * e + std::sin(theta) * w;
    AmbientVector q = random_unit(rng, d);
    q = (q - q.dot(v) * v).normalized();
    AmbientVector u = random_unit(rng, d);
    u = (u - u.dot(v) * v - u.dot(q) * q).normalized();
    const double s = unit(rng);
    slack = std::min(slack, dzeta(s, SpherePoint(q), TangentVector(SpherePoint(q), u)).norm() - std::cos(r));
  }
  c.detail = {{"finite_difference_cases", fd_cases}, {"max_relative_error", fd_err}, {"tolerance", 1e-6},
              {"bound_cases", 1000}, {"min_bound_slack", slack}};
  c.pass = fd_err <= 1e-6 && slack >= 0.0;
}

void zeta_track(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64& rng) {
  const Track t = track_zeta(round(pi / 3, random_rotation(4, rng), opt.resolution));
  const bool embedded = t.complete && t.diagnostics.value("embedded_throughout", false);
  const double endpoint = t.diagnostics.value("endpoint_error", 1e300);
  const DomainAtlas atlas = DomainAtlas::sphere(2, opt.resolution);
  double worst = 0.0;
  const std::vector<DiffeoPtr> gs = {identity_diffeo(), squeeze_diffeo(1.6), squeeze_diffeo(0.5),
                                     rotation_diffeo(random_rotation(3, rng)),
                                     compose(squeeze_diffeo(1.3), rotation_diffeo(random_rotation(3, rng)))};
  for (const auto& g : gs) {
    const Rotation q = random_rotation(4, rng);
    const TwistedDistance dist =
        twisted_distance(phi_hemi(psi(q, g, pi / 2, opt.resolution), false).cls, canonicalize(q, g), atlas);
    worst = std::max({worst, dist.rotation, dist.diffeo});
  }
  c.detail = {{"steps", t.steps.size()}, {"embedded_throughout", embedded}, {"endpoint_error", endpoint},
              {"endpoint_tolerance", 1e-8}, {"max_round_trip_error", worst}, {"round_trip_tolerance", 1e-6}};
  if (!t.complete) c.detail["failure"] = t.failure;
  c.pass = embedded && t.steps.size() == kTrackSteps && endpoint <= 1e-8 && worst <= 1e-6;
}

void psi_phi(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64& rng) {
  const DomainAtlas atlas = DomainAtlas::sphere(2, opt.resolution);
  const std::vector<DiffeoPtr> gs = {identity_diffeo(), squeeze_diffeo(1.6), squeeze_diffeo(0.5),
                                     rotation_diffeo(random_rotation(3, rng)),
                                     compose(squeeze_diffeo(1.3), rotation_diffeo(random_rotation(3, rng)))};
  const std::vector<double> rs = {0.3, pi / 4, 0.6, 1.0, 1.3};
  double worst = 0.0;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    const Rotation q = random_rotation(4, rng);
    const TwistedDistance dist =
        twisted_distance(phi_convex(psi(q, gs[k], rs[k], opt.resolution), false).cls, canonicalize(q, gs[k]), atlas);
    worst = std::max({worst, dist.rotation, dist.diffeo});
  }
  c.detail = {{"triples", gs.size()}, {"max_error", worst}, {"tolerance", 1e-6}};
  c.pass = worst <= 1e-6;
}

void deform(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64&) {
  const auto t0 = Clock::now();
  const Track t = deform_to_round(family_radial_graph(2, pi / 4, 1e-2, RadialProfile::Cubic, opt.resolution));
  const double runtime = seconds_since(t0);
  const bool convex = t.diagnostics.value("convex_throughout", false);
  const double endpoint = t.diagnostics.value("endpoint_error", 1e300);
  c.detail = {{"complete", t.complete}, {"steps", t.steps.size()}, {"convex_throughout", convex},
              {"endpoint_error", endpoint}, {"endpoint_tolerance", 1e-5}, {"stage_gap", t.stage_gap},
              {"runtime_s", runtime}, {"budget_s", 60.0}};
  if (!t.complete) c.detail["failure"] = t.failure;
  c.pass = t.complete && convex && endpoint <= 1e-5 && runtime < 60.0;
}

void embedding(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64& rng) {
  int round_clean = 0;
  const std::vector<double> rs = {0.3, pi / 4, 1.2, pi / 2, 2.5};
  for (double r : rs) {
    const IntersectionReport rep = self_intersections(round(r, random_rotation(4, rng), opt.resolution));
    if (rep.embedded && rep.clusters.empty() && rep.suspects.empty()) ++round_clean;
  }
  const int m = self_intersections(family_clifford(2, 1, opt.resolution)).m;
  const int m_star = dual_embedding_check(family_clifford(2, 1, opt.resolution)).m;
  const int oracle = brute_force_multiplicity(family_clifford(2, 1, opt.oracle_resolution), 1e-9);
  const int oracle_star = brute_force_multiplicity(dual(family_clifford(2, 1, opt.oracle_resolution)), 1e-9);
  c.detail = {{"round_clean", round_clean}, {"round_cases", rs.size()}, {"clifford_2_1_m", m},
              {"dual_m", m_star}, {"oracle_m", oracle}, {"oracle_dual_m", oracle_star},
              {"oracle_resolution", opt.oracle_resolution}};
  c.pass = round_clean == static_cast<int>(rs.size()) && m == 2 && m_star == 2 && oracle == m && oracle_star == m_star;
}

void covering(CriterionResult& c, const VerifyOptions& opt, std::mt19937_64&) {
  const int res = opt.resolution;
  const Rotation id = Rotation::identity(4);
  struct Case {
    std::string label;
    Immersion f;
    DeckGroup gamma;
    int k;
  };
  const std::vector<Case> cases = {{"equator/antipodal", round(pi / 2, id, res), deck_antipodal(2), 1},
                                   {"cap pi/4/antipodal", round(pi / 4, id, res), deck_antipodal(2), 2},
                                   {"round 0.5/lens:3,1", round(0.5, id, res), deck_lens(3, 1), 3}};
  c.pass = true;
  c.detail["preimage"] = json::array();
  for (const auto& cs : cases) {
    const PreimageReport r = preimage_components(cs.f, cs.gamma);
    json j = to_json(r);
    j["case"] = cs.label;
    c.detail["preimage"].push_back(j);
    c.pass = c.pass && r.identity_holds && r.k * r.gc_order == cs.gamma.order() && r.k == cs.k;
  }
  c.detail["multiplicity"] = json::array();
  for (std::size_t i = 0; i < 2; ++i) {
    const MultiplicityReport r = multiplicity_bound_check(cases[i].f, cases[i].gamma);
    json j = to_json(r);
    j["case"] = cases[i].label;
    c.detail["multiplicity"].push_back(j);
    c.pass = c.pass && !r.skipped && r.bound_holds;
  }
  const MultiplicityReport skipped = multiplicity_bound_check(family_clifford(2, 1, res), deck_trivial(2));
  c.detail["hypothesis_fails"] = {{"case", "clifford(2,1)/trivial"}, {"skipped", skipped.skipped},
                                  {"reason", skipped.reason}};
  c.pass = c.pass && skipped.skipped;
}

struct Entry {
  const char* title;
  Check check;
};

const Entry kEntries[] = {
    {"calibration", calibration},
    {"Clifford data", clifford_data},
    {"radii shift law", radii_shift},
    {"Gauss of translate", gauss_of_translate},
    {"dual laws", dual_laws},
    {"hemisphere locus", hemisphere},
    {"Moebius monotonicity", moebius},
    {"zeta bound", zeta_bound},
    {"zeta track", zeta_track},
    {"Psi/Phi round trip", psi_phi},
    {"deform to round", deform},
    {"embedding detection", embedding},
    {"covering counts", covering},
    {"suite wall time", nullptr},
};

}  // namespace

CriterionResult run_criterion(int id, const VerifyOptions& opt) {
  if (id < 1 || id >= kCriterionCount) throw DomainError("run_criterion: no criterion " + std::to_string(id));
  CriterionResult c;
  c.id = id;
  c.title = kEntries[id - 1].title;
  std::mt19937_64 rng(opt.seed * 1000003ULL + static_cast<unsigned>(id));
  const auto t0 = Clock::now();
  try {
    kEntries[id - 1].check(c, opt, rng);
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail["error"] = e.what();
  }
  c.seconds = seconds_since(t0);
  return c;
}

std::vector<CriterionResult> run_verify_suite(const VerifyOptions& opt,
                                              const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  const auto t0 = Clock::now();
  for (int id = 1; id < kCriterionCount; ++id) {
    out.push_back(run_criterion(id, opt));
    if (on_result) on_result(out.back());
  }
  CriterionResult total;
  total.id = kCriterionCount;
  total.title = kEntries[kCriterionCount - 1].title;
  total.seconds = seconds_since(t0);
  total.detail = {{"total_s", total.seconds}, {"budget_s", kSuiteBudgetSeconds}};
  total.pass = total.seconds < kSuiteBudgetSeconds;
  out.push_back(total);
  if (on_result) on_result(total);
  return out;
}

std::string format_result(const CriterionResult& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s %2d  %-22s (%.1f s)", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(),
                r.seconds);
  return buf;
}

json to_json(const CriterionResult& r) {
  return {{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"seconds", r.seconds}, {"detail", r.detail}};
}

}  // namespace spherelab
