#include "spherelab/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spherelab/errors.hpp"
#include "spherelab/operators.hpp"
#include "spherelab/point_maps.hpp"
#include "spherelab/rigidity.hpp"

namespace spherelab {

namespace {

constexpr double kPi = std::numbers::pi;
// Bisection depth when a monitor changes sign between grid points, and when
// locating a failure.
constexpr int kSignBisections = 8;
constexpr int kFailureBisections = 30;

void fill_monitors(const std::vector<CurvatureSample>& spec, TrackStep& step) {
  step.min_k = 1e300;
  step.max_k = -1e300;
  step.rank_margin = 1e300;
  for (const auto& c : spec) {
    step.min_k = std::min(step.min_k, c.kappas.front());
    step.max_k = std::max(step.max_k, c.kappas.back());
    step.rank_margin = std::min(step.rank_margin, c.rank_margin);
  }
  const CircleInterval j = radii_interval(spec).interval;
  step.j_mid = j.mid;
  step.j_width = j.width();
}

double max_pointwise(const Immersion& a, const Immersion& b) {
  if (a.ambient() != b.ambient() || a.ambient_dim() != b.ambient_dim() || a.atlas().size() != b.atlas().size()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.atlas().size(); ++i) worst = std::max(worst, (a.point(i) - b.point(i)).norm());
  return worst;
}

using Builder = std::function<Immersion(double)>;
using Extra = std::function<void(const Immersion&, const std::vector<CurvatureSample>&, TrackStep&)>;
using StopRule = std::function<bool(const TrackStep&)>;

struct StageSpec {
  std::string label;
  std::vector<double> grid;
  Builder build;
  Extra extra = nullptr;
  bool check_embedding = false;
  // Ends the stage after the first step satisfying it.
  StopRule stop = nullptr;
};

struct Evaluated {
  TrackStep step;
  Immersion imm;
};

Evaluated evaluate(const StageSpec& spec, double param) {
  Immersion imm = spec.build(param);
  const auto curv = spectrum(imm);
  TrackStep step;
  step.stage = spec.label;
  step.param = param;
  fill_monitors(curv, step);
  if (spec.check_embedding && imm.ambient() == Ambient::Sphere) step.embedded = self_intersections(imm).embedded;
  if (spec.extra) spec.extra(imm, curv, step);
  return {std::move(step), std::move(imm)};
}

// Strict sign flip of min_k or max_k; values within 1e-9 of 0 count as neither sign.
bool sign_change(const TrackStep& a, const TrackStep& b) {
  constexpr double tol = 1e-9;
  auto flips = [](double x, double y) { return (x > tol && y < -tol) || (x < -tol && y > tol); };
  return flips(a.min_k, b.min_k) || flips(a.max_k, b.max_k);
}

// Runs the grid; returns false when a step failed and the track was truncated.
bool run_stage(Track& t, const StageSpec& spec) {
  TrackStage stage{spec.label, t.steps.size(), t.steps.size()};
  std::optional<Evaluated> prev;
  bool ok = true;
  for (std::size_t k = 0; k < spec.grid.size(); ++k) {
    const double param = spec.grid[k];
    std::optional<Evaluated> cur;
    try {
      cur = evaluate(spec, param);
    } catch (const Error& e) {
      std::ostringstream os;
      os.precision(12);
      os << spec.label << ": step " << k << " (param " << param << ") failed: " << e.what();
      t.complete = false;
      t.failure = os.str();
      if (prev) {
        // Last good parameter before the failure.
        double good = prev->step.param, bad = param;
        for (int it = 0; it < kFailureBisections; ++it) {
          const double mid = 0.5 * (good + bad);
          try {
            evaluate(spec, mid);
            good = mid;
          } catch (const Error&) {
            bad = mid;
          }
        }
        t.diagnostics["failure_bracket"] = {good, bad};
      }
      ok = false;
      break;
    }
    if (prev && sign_change(prev->step, cur->step)) {
      std::vector<Evaluated> inserted;
      Evaluated lo = *prev, hi = *cur;
      for (int it = 0; it < kSignBisections; ++it) {
        Evaluated mid = evaluate(spec, 0.5 * (lo.step.param + hi.step.param));
        mid.step.refined = true;
        inserted.push_back(mid);
        if (sign_change(lo.step, mid.step)) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      const double from = prev->step.param;
      std::sort(inserted.begin(), inserted.end(), [from](const Evaluated& a, const Evaluated& b) {
        return std::abs(a.step.param - from) < std::abs(b.step.param - from);
      });
      for (auto& e : inserted) {
        t.steps.push_back(e.step);
        t.snapshots.push_back(e.imm);
      }
      t.diagnostics["sign_change_near"] = 0.5 * (lo.step.param + hi.step.param);
    }
    t.steps.push_back(cur->step);
    t.snapshots.push_back(cur->imm);
    prev = cur;
    if (spec.stop && spec.stop(cur->step)) break;
  }
  stage.last = t.steps.size();
  for (std::size_t i = stage.first; i < stage.last; ++i) t.steps[i].step = static_cast<int>(i - stage.first);
  if (stage.last > stage.first && !t.stages.empty() && t.stages.back().last > t.stages.back().first) {
    const double gap = max_pointwise(t.snapshots[t.stages.back().last - 1], t.snapshots[stage.first]);
    if (!std::isnan(gap)) t.stage_gap = std::max(t.stage_gap, gap);
  }
  t.stages.push_back(stage);
  return ok;
}

double min_radius(const std::vector<CurvatureSample>& spec) {
  double out = 1e300;
  for (const auto& c : spec)
    for (double r : c.radii) out = std::min(out, mod_pi(r));
  return out;
}

double smallest_singular(const Matrix& m) {
  const Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()[svd.singularValues().size() - 1];
}

}  // namespace

std::vector<double> uniform_grid(double a, double b, int steps) {
  if (steps < 2) return {b};
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) out[k] = a + (b - a) * k / (steps - 1);
  out.back() = b;
  return out;
}

TrackStep monitor_step(const Immersion& f, bool check_embedding) {
  TrackStep step;
  fill_monitors(spectrum(f), step);
  if (check_embedding && f.ambient() == Ambient::Sphere) step.embedded = self_intersections(f).embedded;
  return step;
}

json step_json(const TrackStep& s) {
  return {{"stage", s.stage},     {"step", s.step},       {"param", s.param},
          {"min_k", s.min_k},     {"max_k", s.max_k},     {"J_mid", s.j_mid},
          {"J_width", s.j_width}, {"embedded", s.embedded ? json(*s.embedded) : json(nullptr)},
          {"rank_margin", s.rank_margin}};
}

void write_jsonl(std::ostream& os, const Track& t) {
  for (const auto& s : t.steps) os << step_json(s).dump() << '\n';
}

json to_json(const Track& t) {
  json stages = json::array();
  for (const auto& s : t.stages) {
    json e = {{"label", s.label}, {"steps", s.last - s.first}};
    if (s.last > s.first) {
      e["first_param"] = t.steps[s.first].param;
      e["last_param"] = t.steps[s.last - 1].param;
    }
    stages.push_back(e);
  }
  json steps = json::array();
  for (const auto& s : t.steps) {
    json e = step_json(s);
    if (s.refined) e["refined"] = true;
    if (!s.extra.empty()) e["extra"] = s.extra;
    steps.push_back(e);
  }
  return {{"complete", t.complete}, {"failure", t.failure},         {"stage_gap", t.stage_gap},
          {"stages", stages},       {"diagnostics", t.diagnostics}, {"steps", steps}};
}

Track track_normal_translate(const Immersion& f, const std::vector<double>& r_path) {
  const auto spec = spectrum(f);
  Track t;
  StageSpec stage{"translate", r_path, [&](double r) { return normal_translate(f, r, spec); },
                  [&](const Immersion&, const std::vector<CurvatureSample>&, TrackStep& s) {
                    s.extra["l"] = translate_l(spec, s.param);
                  }};
  run_stage(t, stage);
  return t;
}

Track track_moebius(const Immersion& f, const std::vector<double>& s_grid, bool check_embedding) {
  if (!classify(f).locally_convex) throw HypothesisError("track_moebius: f is not locally convex");
  const SpherePoint c = circumcenter(f.points()).center;
  Track t;
  StageSpec stage{"moebius", s_grid, [&](double s) { return apply_moebius(f, c, s); },
                  [](const Immersion&, const std::vector<CurvatureSample>&, TrackStep& s) { s.extra["mu"] = s.min_k; },
                  check_embedding};
  run_stage(t, stage);
  bool increasing = true;
  const TrackStep* last = nullptr;
  for (const auto& s : t.steps) {
    if (s.refined) continue;
    if (last && !(s.param < last->param && s.min_k > last->min_k)) increasing = false;
    last = &s;
  }
  t.diagnostics["center"] = std::vector<double>(c.v().data(), c.v().data() + c.v().size());
  t.diagnostics["mu_strictly_increasing"] = increasing;
  return t;
}

Track track_translate_moebius(const Immersion& f, double s, int steps) {
  const auto spec = spectrum(f);
  const double a = min_radius(spec);
  if (!(a > kTranslateEndMargin)) throw DomainError("track_translate_moebius: smallest principal radius too small");
  const SpherePoint c = circumcenter(f.points()).center;
  const double t_end = a - kTranslateEndMargin;
  Track t;
  StageSpec stage{"translate-moebius", uniform_grid(0.0, t_end, steps),
                  [&](double tt) {
                    const Immersion g = apply_moebius(normal_translate(f, tt, spec), c, s);
                    return normal_translate(g, -tt);
                  },
                  [](const Immersion&, const std::vector<CurvatureSample>& curv, TrackStep& st) {
                    st.extra["radius_margin"] = min_radius(curv) - st.param;
                  }};
  run_stage(t, stage);
  t.diagnostics["a"] = a;
  t.diagnostics["t_end"] = t_end;
  bool radii_exceed_t = true;
  for (const auto& st : t.steps) radii_exceed_t = radii_exceed_t && st.extra["radius_margin"].get<double>() > 0.0;
  t.diagnostics["radii_exceed_t"] = radii_exceed_t;

  // Extended formula at t = a, evaluated pointwise for reporting only:
  // cos a M(f_a) - sin a dM(nu_{f_a}) / |dM(nu_{f_a})| with nu_{f_a} = cos a nu - sin a f.
  if (t.complete && !t.snapshots.empty()) {
    const Matrix frame = rotation_to(c).matrix();
    double gap = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const AmbientVector p = f.point(i);
      const AmbientVector nu = spec[i].gauss;
      const AmbientVector fa = std::cos(a) * p + std::sin(a) * nu;
      const AmbientVector nua = std::cos(a) * nu - std::sin(a) * p;
      JetVec line(static_cast<std::size_t>(fa.size()));
      const Jet tau = Jet::variable(0.0, 0, 1, 1);
      for (Eigen::Index k = 0; k < fa.size(); ++k) line[k] = Jet(fa[k]) + tau * nua[k];
      const JetVec img = maps::moebius(frame, s, maps::normalized(line));
      AmbientVector q(fa.size()), w(fa.size());
      for (Eigen::Index k = 0; k < fa.size(); ++k) {
        q[k] = img[k].value();
        w[k] = img[k].partial(0);
      }
      const AmbientVector h = std::cos(a) * q - std::sin(a) * w.normalized();
      gap = std::max(gap, (h - t.snapshots.back().point(i)).norm());
    }
    t.diagnostics["extended_endpoint_gap"] = gap;
  }
  return t;
}

Track track_euclidean_straightline(const Immersion& phi, double r, int steps) {
  if (phi.ambient() != Ambient::Euclidean) throw DomainError("track_euclidean_straightline: needs a Euclidean immersion");
  if (!(classify(phi).max_kappa < 0.0)) {
    throw HypothesisError("track_euclidean_straightline: principal curvatures are not all negative");
  }
  Track t;
  StageSpec stage{"straightline", uniform_grid(0.0, 1.0, steps), [&](double s) {
                    return Immersion(phi.atlas(), straight_line_node(phi.node(), r, s),
                                     {{"op", "straightline"}, {"r", r}, {"s", s}, {"of", phi.provenance()}},
                                     phi.diff_mode());
                  }};
  run_stage(t, stage);
  bool negative = true;
  for (const auto& s : t.steps) negative = negative && s.max_k < 0.0;
  t.diagnostics["curvature_negative_throughout"] = negative;
  return t;
}

Track deform_to_round(const Immersion& f, int steps) {
  if (f.atlas().kind() != DomainKind::Sphere) throw DomainError("deform_to_round: domain must be S^n");
  if (!classify(f).locally_convex) throw HypothesisError("deform_to_round: f is not locally convex");
  const SpherePoint c = circumcenter(f.points()).center;
  Track t;

  // (i) Moebius shrink until the radii and the image cap stay below pi/2 by a margin.
  const double limit = kPi / 2 - kDeformMargin;
  StageSpec shrink{"moebius", decreasing_grid(kDeformMargin, kDeformMargin),
                   [&](double s) { return apply_moebius(f, c, s); },
                   [](const Immersion& g, const std::vector<CurvatureSample>&, TrackStep& st) {
                     st.extra["cap_radius"] = circumcenter(g.points()).radius;
                   }};
  shrink.stop = [limit](const TrackStep& st) {
    return radius_of(st.min_k) <= limit && st.extra["cap_radius"].get<double>() <= limit;
  };
  if (!run_stage(t, shrink)) return t;
  if (!shrink.stop(t.steps.back())) {
    t.complete = false;
    t.failure = "moebius: radii or cap did not drop below pi/2 - margin on the grid";
    return t;
  }
  const Immersion fi = t.snapshots.back();

  // (ii) central projection, straight line to j_r o nu, (iii) back to the sphere.
  const double r = kPi / 4;
  const Rotation q = rotation_to(circumcenter(fi.points()).center);
  const Immersion phi = central_project(fi, q);
  StageSpec line{"straightline", uniform_grid(0.0, 1.0, steps),
                 [&](double s) {
                   return Immersion(fi.atlas(), central_inverse_node(straight_line_node(phi.node(), r, s), q),
                                    {{"op", "deform"}, {"stage", "straightline"}, {"s", s}}, fi.diff_mode());
                 },
                 [&](const Immersion&, const std::vector<CurvatureSample>&, TrackStep& st) {
                   const Immersion e(phi.atlas(), straight_line_node(phi.node(), r, st.param), {}, phi.diff_mode());
                   st.extra["euclidean_max_k"] = classify(e).max_kappa;
                 }};
  if (!run_stage(t, line)) return t;

  bool convex = true;
  for (const auto& st : t.steps) {
    convex = convex && st.min_k > 0.0;
    if (st.extra.contains("euclidean_max_k")) convex = convex && st.extra["euclidean_max_k"].get<double>() < 0.0;
  }
  t.diagnostics["convex_throughout"] = convex;
  const PhiResult res = phi_convex(fi);
  const Immersion target = psi(res.cls.q, res.cls.g, r, fi.atlas().resolution());
  t.diagnostics["endpoint_error"] = max_pointwise(t.snapshots.back(), target);
  t.diagnostics["moebius_s"] = t.steps[t.stages.front().last - 1].param;
  return t;
}

Track track_zeta(const Immersion& f, int steps, bool check_embedding) {
  const PhiResult res = phi_hemi(f);
  const Rotation q = res.cls.q;
  const AmbientVector c = res.cap.center.v();
  const double bound = std::cos(res.cap.radius);
  const auto& samples = f.atlas().samples();
  std::vector<double> base(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) base[i] = smallest_singular(jacobian(f, samples[i]));

  Track t;
  StageSpec stage{"zeta", uniform_grid(0.0, 1.0, steps), [&](double s) { return zeta_conjugate(f, q, s); },
                  [&](const Immersion& g, const std::vector<CurvatureSample>& curv, TrackStep& st) {
                    double hemi = 1e300, ratio = 1e300;
                    for (std::size_t i = 0; i < curv.size(); ++i) {
                      hemi = std::min(hemi, curv[i].gauss.dot(c));
                      ratio = std::min(ratio, smallest_singular(jacobian(g, samples[i])) / base[i]);
                    }
                    st.extra["gauss_hemisphere_margin"] = hemi;
                    st.extra["singular_ratio"] = ratio;
                  },
                  check_embedding};
  run_stage(t, stage);
  bool hemisphere = true, derivative = true, embedded = true;
  for (const auto& st : t.steps) {
    hemisphere = hemisphere && st.extra["gauss_hemisphere_margin"].get<double>() > 0.0;
    derivative = derivative && st.extra["singular_ratio"].get<double>() >= 0.95 * bound;
    if (st.embedded) embedded = embedded && *st.embedded;
  }
  t.diagnostics["cap_radius"] = res.cap.radius;
  t.diagnostics["gauss_in_hemisphere"] = hemisphere;
  t.diagnostics["derivative_bound"] = derivative;
  if (check_embedding) t.diagnostics["embedded_throughout"] = embedded;
  if (t.complete) {
    const Immersion target = psi(q, res.cls.g, kPi / 2, f.atlas().resolution());
    t.diagnostics["endpoint_error"] = max_pointwise(t.snapshots.back(), target);
  }
  return t;
}

}  // namespace spherelab
