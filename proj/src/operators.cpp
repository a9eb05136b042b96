#include "spherelab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <numbers>
#include <random>
#include <sstream>

#include "spherelab/errors.hpp"
#include "spherelab/parallel.hpp"
#include "spherelab/point_maps.hpp"
#include "spherelab/rigidity.hpp"

namespace spherelab {
namespace {

constexpr double kPi = std::numbers::pi;

json vec_json(const AmbientVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Matrix transpose(const Rotation& q) { return q.matrix().transpose(); }

class GaussNode final : public ImmersionNode {
 public:
  explicit GaussNode(NodePtr child) : child_(std::move(child)) {}
  JetVec eval(const JetVec& d, DomainKind kind) const override {
    return gauss_jet(child_->eval(d, kind), d, kind, child_->ambient());
  }
  int depth() const override { return child_->depth() + 1; }
  int output_dim() const override { return child_->output_dim(); }
  Ambient ambient() const override { return Ambient::Sphere; }

 private:
  NodePtr child_;
};

class TranslateNode final : public ImmersionNode {
 public:
  TranslateNode(NodePtr child, double r) : child_(std::move(child)), c_(std::cos(r)), s_(std::sin(r)) {}
  JetVec eval(const JetVec& d, DomainKind kind) const override {
    const JetVec f = child_->eval(d, kind);
    const JetVec nu = gauss_jet(f, d, kind, Ambient::Sphere);
    JetVec out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * c_ + nu[i] * s_;
    return out;
  }
  int depth() const override { return child_->depth() + 1; }
  int output_dim() const override { return child_->output_dim(); }
  Ambient ambient() const override { return Ambient::Sphere; }

 private:
  NodePtr child_;
  double c_, s_;
};

class MoebiusNode final : public ImmersionNode {
 public:
  MoebiusNode(NodePtr child, const SpherePoint& c, double s)
      : child_(std::move(child)), frame_(rotation_to(c).matrix()), s_(s) {}
  JetVec eval(const JetVec& d, DomainKind kind) const override {
    return maps::moebius(frame_, s_, child_->eval(d, kind));
  }
  int depth() const override { return child_->depth(); }
  int output_dim() const override { return child_->output_dim(); }
  Ambient ambient() const override { return Ambient::Sphere; }

 private:
  NodePtr child_;
  Matrix frame_;
  double s_;
};

class ZetaConjNode final : public ImmersionNode {
 public:
  ZetaConjNode(NodePtr child, const Rotation& q, double s) : child_(std::move(child)), q_(q.matrix()), s_(s) {}
  JetVec eval(const JetVec& d, DomainKind kind) const override {
    return maps::apply(q_, maps::zeta(s_, maps::apply(Matrix(q_.transpose()), child_->eval(d, kind))));
  }
  int depth() const override { return child_->depth(); }
  int output_dim() const override { return child_->output_dim(); }
  Ambient ambient() const override { return Ambient::Sphere; }

 private:
  NodePtr child_;
  Matrix q_;
  double s_;
};

class TauNode final : public ImmersionNode {
 public:
  TauNode(NodePtr child, const Rotation& q) : child_(std::move(child)), qt_(transpose(q)) {}
  JetVec eval(const JetVec& d, DomainKind kind) const override {
    return maps::tau(maps::apply(qt_, child_->eval(d, kind)));
  }
  int depth() const override { return child_->depth(); }
  int output_dim() const override { return child_->output_dim() - 1; }
  Ambient ambient() const override { return Ambient::Sphere; }

 private:
  NodePtr child_;
  Matrix qt_;
};

class CentralNode final : public ImmersionNode {
 public:
  CentralNode(NodePtr child, const Rotation& q) : child_(std::move(child)), qt_(transpose(q)) {}
  JetVec eval(const JetVec& d, DomainKind kind) const override {
    return maps::central(maps::apply(qt_, child_->eval(d, kind)));
  }
  int depth() const override { return child_->depth(); }
  int output_dim() const override { return child_->output_dim() - 1; }
  Ambient ambient() const override { return Ambient::Euclidean; }

 private:
  NodePtr child_;
  Matrix qt_;
};

class CentralInverseNode final : public ImmersionNode {
 public:
  CentralInverseNode(NodePtr child, const Rotation& q) : child_(std::move(child)), q_(q.matrix()) {}
  JetVec eval(const JetVec& d, DomainKind kind) const override {
    return maps::apply(q_, maps::central_inverse(child_->eval(d, kind)));
  }
  int depth() const override { return child_->depth(); }
  int output_dim() const override { return child_->output_dim() + 1; }
  Ambient ambient() const override { return Ambient::Sphere; }

 private:
  NodePtr child_;
  Matrix q_;
};

class StraightLineNode final : public ImmersionNode {
 public:
  StraightLineNode(NodePtr child, double r, double s) : child_(std::move(child)), tan_r_(std::tan(r)), s_(s) {}
  JetVec eval(const JetVec& d, DomainKind kind) const override {
    const JetVec phi = child_->eval(d, kind);
    if (s_ == 0.0) return phi;
    const JetVec nu = gauss_jet(phi, d, kind, Ambient::Euclidean);
    JetVec out(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) out[i] = phi[i] * (1.0 - s_) + nu[i] * (s_ * tan_r_);
    return out;
  }
  int depth() const override { return child_->depth() + 1; }
  int output_dim() const override { return child_->output_dim(); }
  Ambient ambient() const override { return Ambient::Euclidean; }

 private:
  NodePtr child_;
  double tan_r_, s_;
};

void require_sphere(const Immersion& f, const char* what) {
  if (f.ambient() != Ambient::Sphere) throw DomainError(std::string(what) + ": needs a spherical immersion");
}

}  // namespace

NodePtr gauss_node(NodePtr child) { return std::make_shared<GaussNode>(std::move(child)); }
NodePtr translate_node(NodePtr child, double r) { return std::make_shared<TranslateNode>(std::move(child), r); }
NodePtr moebius_node(NodePtr child, const SpherePoint& c, double s) {
  return std::make_shared<MoebiusNode>(std::move(child), c, s);
}
NodePtr zeta_conj_node(NodePtr child, const Rotation& q, double s) {
  return std::make_shared<ZetaConjNode>(std::move(child), q, s);
}
NodePtr tau_node(NodePtr child, const Rotation& q) { return std::make_shared<TauNode>(std::move(child), q); }
NodePtr central_node(NodePtr child, const Rotation& q) { return std::make_shared<CentralNode>(std::move(child), q); }
NodePtr central_inverse_node(NodePtr child, const Rotation& q) {
  return std::make_shared<CentralInverseNode>(std::move(child), q);
}
NodePtr straight_line_node(NodePtr child, double r, double s) {
  return std::make_shared<StraightLineNode>(std::move(child), r, s);
}

// ---------------------------------------------------------------- translate / dual

int translate_l(const std::vector<CurvatureSample>& spec, double r) {
  int l = 0;
  for (double rho : spec.front().radii)
    if (std::sin(rho) * std::sin(rho - r) < 0.0) ++l;
  return l;
}

Immersion normal_translate(const Immersion& f, double r, double margin) {
  require_sphere(f, "normal_translate");
  return normal_translate(f, r, spectrum(f), margin);
}

Immersion normal_translate(const Immersion& f, double r, const std::vector<CurvatureSample>& spec, double margin) {
  require_sphere(f, "normal_translate");
  double worst = 1e300, worst_rho = 0.0;
  std::size_t worst_i = 0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    for (double rho : spec[i].radii) {
      const double d = circle_distance(rho, r);
      if (d < worst) {
        worst = d;
        worst_rho = rho;
        worst_i = i;
      }
    }
  }
  if (!(worst > margin)) {
    std::ostringstream os;
    os.precision(12);
    os << "principal radius hit: r = " << r << " is within " << worst << " (margin " << margin
       << ") of principal radius " << worst_rho << " at sample " << worst_i << " ["
       << describe_sample(spec[worst_i].x) << "]";
    throw DegeneracyError(os.str());
  }
  const int l = translate_l(spec, r);
  return Immersion(f.atlas(), translate_node(f.node(), r),
                   {{"op", "translate"}, {"r", r}, {"l", l}, {"of", f.provenance()}}, f.diff_mode());
}

Immersion dual(const Immersion& f, double margin) {
  require_sphere(f, "dual");
  return dual(f, spectrum(f), margin);
}

Immersion dual(const Immersion& f, const std::vector<CurvatureSample>& spec, double margin) {
  require_sphere(f, "dual");
  for (std::size_t i = 0; i < spec.size(); ++i) {
    for (double k : spec[i].kappas) {
      if (!(std::abs(k) > margin)) {
        std::ostringstream os;
        os.precision(12);
        os << "flat point: principal curvature " << k << " (margin " << margin << ") at sample " << i << " ["
           << describe_sample(spec[i].x) << "]";
        throw DegeneracyError(os.str());
      }
    }
  }
  return Immersion(f.atlas(), gauss_node(f.node()),
                   {{"op", "dual"}, {"l", spec.front().l_count}, {"of", f.provenance()}}, f.diff_mode());
}

AmbientVector hemisphere_locus(const Immersion& f, const Immersion& fstar, const Sample& x, double t) {
  return std::cos(t) * f.point(x) + std::sin(t) * fstar.point(x);
}

// ---------------------------------------------------------------- circumcenter

namespace {

class MoveToFront {
 public:
  MoveToFront(const std::vector<AmbientVector>& pts, unsigned seed) : pts_(pts), dim_(pts.front().size()) {
    std::vector<int> order(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) order[i] = static_cast<int>(i);
    std::mt19937 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    list_.assign(order.begin(), order.end());
    scale_ = 0.0;
    for (const auto& p : pts) scale_ = std::max(scale_, p.cwiseAbs().maxCoeff());
    ball_ = {AmbientVector::Zero(dim_), -1.0};
  }

  Ball run() {
    mtf(list_.end());
    return ball_;
  }

 private:
  bool outside(const AmbientVector& p) const {
    if (ball_.radius < 0.0) return true;
    return (p - ball_.center).norm() > ball_.radius + 1e-13 * std::max(1.0, scale_);
  }

  void set_ball() {
    if (support_.empty()) {
      ball_ = {AmbientVector::Zero(dim_), -1.0};
      return;
    }
    const AmbientVector& p0 = pts_[support_[0]];
    const auto m = static_cast<Eigen::Index>(support_.size()) - 1;
    if (m == 0) {
      ball_ = {p0, 0.0};
      return;
    }
    Matrix a(dim_, m);
    for (Eigen::Index k = 0; k < m; ++k) a.col(k) = pts_[support_[k + 1]] - p0;
    const Matrix gram = a.transpose() * a;
    Eigen::VectorXd rhs(m);
    for (Eigen::Index k = 0; k < m; ++k) rhs[k] = 0.5 * gram(k, k);
    const Eigen::VectorXd lambda = gram.colPivHouseholderQr().solve(rhs);
    const AmbientVector c = p0 + a * lambda;
    double r = 0.0;
    for (int idx : support_) r = std::max(r, (pts_[idx] - c).norm());
    ball_ = {c, r};
  }

  void mtf(std::list<int>::iterator end) {
    set_ball();
    if (static_cast<Eigen::Index>(support_.size()) == dim_ + 1) return;
    for (auto it = list_.begin(); it != end;) {
      const auto next = std::next(it);
      if (outside(pts_[*it])) {
        support_.push_back(*it);
        mtf(it);
        support_.pop_back();
        list_.splice(list_.begin(), list_, it);
      }
      it = next;
    }
  }

  const std::vector<AmbientVector>& pts_;
  Eigen::Index dim_;
  std::list<int> list_;
  std::vector<int> support_;
  Ball ball_;
  double scale_;
};

}  // namespace

Ball minimal_enclosing_ball(const std::vector<AmbientVector>& points, unsigned seed) {
  if (points.empty()) throw DomainError("minimal_enclosing_ball: empty point set");
  Ball b = MoveToFront(points, seed).run();
  // Report the true covering radius of the final centre.
  double r = 0.0;
  for (const auto& p : points) r = std::max(r, (p - b.center).norm());
  b.radius = r;
  return b;
}

Circumcap circumcenter(const std::vector<AmbientVector>& points) {
  const Ball b = minimal_enclosing_ball(points);
  if (!(b.center.norm() > 1e-12)) throw HypothesisError("not hemispherical: enclosing ball is centred at the origin");
  const SpherePoint c(b.center);
  double radius = 0.0;
  for (const auto& p : points) radius = std::max(radius, angle_between(c.v(), p.normalized()));
  if (!(radius < kPi / 2 - kHemisphereMargin)) {
    std::ostringstream os;
    os.precision(12);
    os << "not hemispherical: circumcap radius " << radius << " >= pi/2 - " << kHemisphereMargin;
    throw HypothesisError(os.str());
  }
  return {c, radius};
}

// ---------------------------------------------------------------- Moebius

Immersion apply_moebius(const Immersion& f, const SpherePoint& c, double s) {
  require_sphere(f, "apply_moebius");
  if (!(s > 0.0 && s <= 1.0)) throw DomainError("apply_moebius: s outside (0, 1]");
  if (c.dim() != f.ambient_dim()) throw DomainError("apply_moebius: centre dimension mismatch");
  const auto pts = f.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if ((pts[i] + c.v()).norm() <= kPoleTolerance) {
      throw PoleError("apply_moebius: sample " + std::to_string(i) + " sits at the pole -c");
    }
  }
  return Immersion(f.atlas(), moebius_node(f.node(), c, s),
                   {{"op", "moebius"}, {"s", s}, {"c", vec_json(c.v())}, {"of", f.provenance()}}, f.diff_mode());
}

std::vector<double> decreasing_grid(double s_min, double step) {
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double s = 1.0 - k * step;
    if (s < s_min - 1e-12) break;
    out.push_back(std::max(s, s_min));
  }
  return out;
}

MoebiusMonitor moebius_flow_monitor(const Immersion& f, const std::vector<double>& s_grid, bool check_embedding) {
  const auto spec = spectrum(f);
  const HypothesisReport h = classify(spec);
  if (!h.locally_convex) throw HypothesisError("moebius_flow_monitor: f is not locally convex");
  MoebiusMonitor out{circumcenter(f.points()).center, {}, true};
  for (double s : s_grid) {
    const Immersion g = apply_moebius(f, out.center, s);
    const auto gs = spectrum(g);
    MoebiusStep step;
    step.s = s;
    step.mu = 1e300;
    for (const auto& c : gs) step.mu = std::min(step.mu, c.kappas.front());
    step.j = radii_interval(gs).interval;
    if (check_embedding) {
      step.embedded_checked = true;
      step.embedded = self_intersections(g).embedded;
    }
    out.steps.push_back(step);
  }
  for (std::size_t i = 1; i < out.steps.size(); ++i) {
    const bool decreasing_s = out.steps[i].s < out.steps[i - 1].s;
    if (!decreasing_s || !(out.steps[i].mu > out.steps[i - 1].mu)) out.strictly_increasing = false;
  }
  return out;
}

json to_json(const MoebiusMonitor& m) {
  json steps = json::array();
  for (const auto& s : m.steps) {
    json e = {{"s", s.s}, {"mu", s.mu}, {"J_lo", s.j.lo()}, {"J_hi", s.j.hi()}};
    e["embedded"] = s.embedded_checked ? json(s.embedded) : json(nullptr);
    steps.push_back(e);
  }
  return {{"center", vec_json(m.center.v())}, {"strictly_increasing", m.strictly_increasing}, {"steps", steps}};
}

// ---------------------------------------------------------------- twisted classes

TwistedClass canonicalize(const Rotation& q, const DiffeoPtr& g) {
  const int d = q.dim();
  const Rotation qc = rotation_to(q(SpherePoint::south(d)));
  const Matrix p0 = (qc.inverse() * q).matrix();
  const Matrix block = p0.topLeftCorner(d - 1, d - 1);
  if (block.isIdentity(1e-15)) return {qc, g, true};
  return {qc, compose(rotation_diffeo(Rotation(block)), g), true};
}

TwistedDistance twisted_distance(const TwistedClass& a, const TwistedClass& b, const DomainAtlas& atlas) {
  const TwistedClass ca = a.canonical ? a : canonicalize(a.q, a.g);
  const TwistedClass cb = b.canonical ? b : canonicalize(b.q, b.g);
  TwistedDistance out;
  out.rotation = (ca.q.matrix() - cb.q.matrix()).cwiseAbs().maxCoeff();
  std::vector<double> err(atlas.size());
  parallel_for(atlas.size(), [&](std::size_t i) {
    const Eigen::VectorXd& p = atlas.domain_point(i);
    err[i] = ((*ca.g)(p, atlas.kind()) - (*cb.g)(p, atlas.kind())).norm();
  });
  out.diffeo = *std::max_element(err.begin(), err.end());
  return out;
}

Immersion psi(const Rotation& q, DiffeoPtr g, double r, int resolution) {
  const int n = q.dim() - 2;
  const std::string gname = g->describe();
  const Immersion base = family_round(n, r, Rotation::identity(q.dim()), identity_diffeo(), resolution);
  const Immersion f = postcompose_rotation(precompose(base, std::move(g)), q);
  return Immersion(f.atlas(), f.node(), {{"op", "psi"}, {"r", r}, {"g", gname}}, f.diff_mode());
}

Immersion central_project(const Immersion& f, const Rotation& q) {
  require_sphere(f, "central_project");
  const auto pts = f.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(q.matrix().col(q.dim() - 1).dot(pts[i]) <= -kPoleTolerance)) {
      throw DomainError("central_project: sample " + std::to_string(i) + " is not strictly southern");
    }
  }
  return Immersion(f.atlas(), central_node(f.node(), q), {{"op", "central_project"}, {"of", f.provenance()}},
                   f.diff_mode());
}

Immersion zeta_conjugate(const Immersion& f, const Rotation& q, double s) {
  require_sphere(f, "zeta_conjugate");
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("zeta_conjugate: s outside [0, 1]");
  const auto pts = f.points();
  const AmbientVector e = q.matrix().col(q.dim() - 1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::min((pts[i] - e).norm(), (pts[i] + e).norm()) <= kPoleTolerance) {
      throw PoleError("zeta_conjugate: sample " + std::to_string(i) + " sits at a pole");
    }
  }
  return Immersion(f.atlas(), zeta_conj_node(f.node(), q, s), {{"op", "zeta"}, {"s", s}, {"of", f.provenance()}},
                   f.diff_mode());
}

namespace {

void fill_diagnostics(PhiResult& out, const DomainAtlas& atlas) {
  const SampledDiffeo sampled(out.cls.g, atlas);
  out.roundtrip_error = sampled.max_roundtrip_error();
  out.min_jacobian_det = sampled.min_jacobian_determinant();
  if (!(out.min_jacobian_det > 0.0)) {
    throw HypothesisError("g_f is not an orientation-preserving local diffeomorphism at every sample");
  }
}

}  // namespace

PhiResult phi_convex(const Immersion& f, bool sample_diagnostics) {
  require_sphere(f, "phi_convex");
  if (f.atlas().kind() != DomainKind::Sphere) throw DomainError("phi_convex: domain must be S^n");
  const auto spec = spectrum(f);
  if (!classify(spec).locally_convex) throw HypothesisError("phi_convex: f is not locally convex");
  const Circumcap cap = circumcenter(f.points());
  const Rotation q = rotation_to(cap.center);
  const NodePtr g_node = gauss_node(central_node(f.node(), q));
  PhiResult out{{q, node_diffeo(g_node, "gauss(pi o Q_f^-1 o f)"), true}, cap};
  if (sample_diagnostics) fill_diagnostics(out, f.atlas());
  return out;
}

PhiResult phi_hemi(const Immersion& f, bool sample_diagnostics) {
  require_sphere(f, "phi_hemi");
  if (f.atlas().kind() != DomainKind::Sphere) throw DomainError("phi_hemi: domain must be S^n");
  const auto& samples = f.atlas().samples();
  std::vector<AmbientVector> nus(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) { nus[i] = gauss_vector(f, samples[i]); });
  Circumcap cap = [&] {
    try {
      return circumcenter(nus);
    } catch (const HypothesisError& e) {
      throw HypothesisError(std::string("phi_hemi: Gauss image ") + e.what());
    }
  }();
  const Rotation q = rotation_to(cap.center);
  const AmbientVector e = q.matrix().col(q.dim() - 1);
  const auto pts = f.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::min((pts[i] - e).norm(), (pts[i] + e).norm()) <= kPoleTolerance) {
      throw PoleError("phi_hemi: sample " + std::to_string(i) + " sits at a pole of Q_f");
    }
  }
  PhiResult out{{q, node_diffeo(tau_node(f.node(), q), "tau o Q_f^-1 o f"), true}, cap};
  if (sample_diagnostics) fill_diagnostics(out, f.atlas());
  return out;
}

}  // namespace spherelab
