#include "spherelab/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "spherelab/errors.hpp"
#include "spherelab/parallel.hpp"
#include "spherelab/point_maps.hpp"

namespace spherelab {
namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a > std::numbers::pi) a -= kTwoPi;
  if (a < -std::numbers::pi) a += kTwoPi;
  return a;
}

// Face f of the cube: axis f / 2, sign + for even f.
int face_axis(int face) { return face / 2; }
double face_sign(int face) { return face % 2 == 0 ? 1.0 : -1.0; }

template <class S>
maps::Vec<S> cube_point(int n, int face, const std::vector<S>& t) {
  const int axis = face_axis(face);
  maps::Vec<S> y(static_cast<std::size_t>(n + 1));
  int j = 0;
  for (int k = 0; k <= n; ++k) {
    if (k == axis) {
      y[k] = S(face_sign(face));
    } else {
      y[k] = t[j++];
    }
  }
  return maps::normalized(y);
}

Eigen::VectorXd to_eigen(const JetVec& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i].value();
  return out;
}

JetVec constant_jets(const Eigen::VectorXd& p) {
  JetVec out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = Jet(p[i]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- atlas

std::shared_ptr<const DomainAtlas::Data> DomainAtlas::build(DomainKind kind, int n, int resolution) {
  if (resolution < 2) throw DomainError("atlas: resolution must be at least 2");
  auto d = std::make_shared<Data>();
  d->kind = kind;
  d->n = n;
  d->resolution = resolution;
  const int r = resolution;

  if (kind == DomainKind::Torus) {
    for (int j = 0; j < r; ++j) {
      for (int i = 0; i < r; ++i) {
        Eigen::VectorXd x(2);
        x << kTwoPi * i / r, kTwoPi * j / r;
        d->samples.push_back({0, x});
        d->points.push_back(x);
      }
    }
    d->adjacency.resize(d->samples.size());
    for (int j = 0; j < r; ++j) {
      for (int i = 0; i < r; ++i) {
        auto& adj = d->adjacency[i + r * j];
        adj = {(i + 1) % r + r * j, (i + r - 1) % r + r * j, i + r * ((j + 1) % r),
               i + r * ((j + r - 1) % r)};
      }
    }
  } else {
    if (n < 1 || n > Jet::kMaxVars) throw DomainError("atlas: sphere dimension must be 1..3");
    const int faces = 2 * (n + 1);
    std::size_t per_face = 1;
    for (int k = 0; k < n; ++k) per_face *= static_cast<std::size_t>(r);
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int f = 0; f < faces; ++f) {
      for (std::size_t m = 0; m < per_face; ++m) {
        std::size_t rem = m;
        Eigen::VectorXd x(n);
        std::vector<double> t(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
          idx[k] = static_cast<int>(rem % r);
          rem /= r;
          x[k] = -1.0 + (2.0 * idx[k] + 1.0) / r;
          t[k] = std::tan(kQuarterPi * x[k]);
        }
        d->samples.push_back({f, x});
        const auto y = cube_point(n, f, t);
        d->points.push_back(Eigen::Map<const Eigen::VectorXd>(y.data(), n + 1));
      }
    }
    d->adjacency.resize(d->samples.size());
    std::vector<int> boundary;
    for (int f = 0; f < faces; ++f) {
      for (std::size_t m = 0; m < per_face; ++m) {
        const int self = static_cast<int>(f * per_face + m);
        std::size_t rem = m;
        std::size_t stride = 1;
        bool on_boundary = false;
        for (int k = 0; k < n; ++k) {
          const int i = static_cast<int>(rem % r);
          rem /= r;
          if (i + 1 < r) d->adjacency[self].push_back(self + static_cast<int>(stride));
          if (i > 0) d->adjacency[self].push_back(self - static_cast<int>(stride));
          if (i == 0 || i == r - 1) on_boundary = true;
          stride *= r;
        }
        if (on_boundary) boundary.push_back(self);
      }
    }
    // Cross-face links: each boundary sample to its nearest boundary sample on another face.
    for (int a : boundary) {
      int best = -1;
      double best_d = 1e300;
      for (int b : boundary) {
        if (d->samples[b].chart == d->samples[a].chart) continue;
        const double dist = (d->points[a] - d->points[b]).squaredNorm();
        if (dist < best_d) {
          best_d = dist;
          best = b;
        }
      }
      auto link = [&](int u, int v) {
        auto& adj = d->adjacency[u];
        if (std::find(adj.begin(), adj.end(), v) == adj.end()) adj.push_back(v);
      };
      link(a, best);
      link(best, a);
    }
  }

  std::vector<double> lengths;
  for (std::size_t a = 0; a < d->adjacency.size(); ++a) {
    for (int b : d->adjacency[a]) {
      if (static_cast<std::size_t>(b) <= a) continue;
      if (kind == DomainKind::Torus) {
        const Eigen::VectorXd diff = d->points[a] - d->points[b];
        lengths.push_back(std::hypot(wrap_angle(diff[0]), wrap_angle(diff[1])));
      } else {
        lengths.push_back((d->points[a] - d->points[b]).norm());
      }
    }
  }
  std::nth_element(lengths.begin(), lengths.begin() + lengths.size() / 2, lengths.end());
  d->median_spacing = lengths[lengths.size() / 2];
  return d;
}

DomainAtlas DomainAtlas::sphere(int n, int resolution) {
  return DomainAtlas(build(DomainKind::Sphere, n, resolution));
}

DomainAtlas DomainAtlas::torus(int resolution) {
  return DomainAtlas(build(DomainKind::Torus, 2, resolution));
}

int DomainAtlas::chart_count() const { return kind() == DomainKind::Torus ? 1 : 2 * (n() + 1); }

JetVec DomainAtlas::domain_jet(const Sample& x, int order) const {
  const int nv = static_cast<int>(x.params.size());
  if (kind() == DomainKind::Torus) {
    return {Jet::variable(x.params[0], 0, 2, order), Jet::variable(x.params[1], 1, 2, order)};
  }
  std::vector<Jet> t(static_cast<std::size_t>(nv));
  for (int k = 0; k < nv; ++k) t[k] = tan(Jet::variable(x.params[k], k, nv, order) * kQuarterPi);
  return cube_point(n(), x.chart, t);
}

Eigen::VectorXd DomainAtlas::domain_point(const Sample& x) const {
  if (kind() == DomainKind::Torus) return x.params;
  std::vector<double> t(static_cast<std::size_t>(x.params.size()));
  for (Eigen::Index k = 0; k < x.params.size(); ++k) t[k] = std::tan(kQuarterPi * x.params[k]);
  const auto y = cube_point(n(), x.chart, t);
  return Eigen::Map<const Eigen::VectorXd>(y.data(), n() + 1);
}

double DomainAtlas::domain_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  if (kind() == DomainKind::Torus) return std::hypot(wrap_angle(a[0] - b[0]), wrap_angle(a[1] - b[1]));
  return (a - b).norm();
}

Sample DomainAtlas::locate(const Eigen::VectorXd& p) const {
  if (kind() == DomainKind::Torus) {
    Eigen::VectorXd x(2);
    for (int i = 0; i < 2; ++i) {
      x[i] = std::fmod(p[i], kTwoPi);
      if (x[i] < 0) x[i] += kTwoPi;
    }
    return {0, x};
  }
  Eigen::Index axis = 0;
  p.cwiseAbs().maxCoeff(&axis);
  const int face = 2 * static_cast<int>(axis) + (p[axis] >= 0.0 ? 0 : 1);
  Eigen::VectorXd x(n());
  int j = 0;
  for (int k = 0; k <= n(); ++k) {
    if (k == axis) continue;
    x[j++] = std::atan(p[k] / std::abs(p[axis])) / kQuarterPi;
  }
  return {face, x};
}

int DomainAtlas::hop_distance(int from, int to, int cap) const {
  if (from == to) return 0;
  std::unordered_map<int, int> seen{{from, 0}};
  std::deque<int> queue{from};
  const auto& adj = adjacency();
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    const int du = seen[u];
    if (du >= cap) continue;
    for (int v : adj[u]) {
      if (seen.count(v)) continue;
      if (v == to) return du + 1;
      seen[v] = du + 1;
      queue.push_back(v);
    }
  }
  return cap + 1;
}

int domain_orientation(const JetVec& domain, DomainKind kind) {
  const int nv = domain[0].nvars();
  double det = 0.0;
  if (kind == DomainKind::Torus) {
    Matrix m(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = domain[i].partial(j);
    det = m.determinant();
  } else {
    const auto d = static_cast<Eigen::Index>(domain.size());
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (int j = 0; j < nv; ++j) m(i, j) = domain[i].partial(j);
      m(i, nv) = domain[i].value();
    }
    det = m.determinant();
  }
  if (!(std::abs(det) > 0.0)) throw DegeneracyError("domain parametrization is singular");
  return det > 0.0 ? 1 : -1;
}

// ---------------------------------------------------------------- diffeos

Eigen::VectorXd DomainDiffeo::operator()(const Eigen::VectorXd& domain_point, DomainKind kind) const {
  if (depth() == 0) return to_eigen(apply(constant_jets(domain_point), kind));
  // Maps built from Gauss-type nodes need derivatives: use a local chart
  // around the point (tangent-plane coordinates on S^n, angles on the torus).
  const int order = depth();
  if (kind == DomainKind::Torus) {
    const JetVec d = {Jet::variable(domain_point[0], 0, 2, order), Jet::variable(domain_point[1], 1, 2, order)};
    return to_eigen(apply(d, kind));
  }
  const auto dim = domain_point.size();
  const int nv = static_cast<int>(dim) - 1;
  const Matrix frame = Eigen::HouseholderQR<Matrix>(Matrix(domain_point)).householderQ();
  JetVec y = constant_jets(domain_point);
  for (int k = 0; k < nv; ++k) {
    const Jet t = Jet::variable(0.0, k, nv, order);
    for (Eigen::Index i = 0; i < dim; ++i) y[i] += t * frame(i, k + 1);
  }
  return to_eigen(apply(maps::normalized(y), kind));
}

namespace {

class IdentityDiffeo final : public DomainDiffeo {
 public:
  JetVec apply(const JetVec& d, DomainKind) const override { return d; }
  std::string describe() const override { return "id"; }
  DiffeoPtr inverse() const override { return identity_diffeo(); }
};

class RotationDiffeo final : public DomainDiffeo {
 public:
  explicit RotationDiffeo(Rotation p) : p_(std::move(p)) {}
  JetVec apply(const JetVec& d, DomainKind kind) const override {
    if (kind != DomainKind::Sphere || static_cast<int>(d.size()) != p_.dim()) {
      throw DomainError("rotation diffeo: needs a sphere domain of matching dimension");
    }
    return maps::apply(p_.matrix(), d);
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "rotation(" << p_.dim() << "x" << p_.dim() << ")";
    return os.str();
  }
  DiffeoPtr inverse() const override { return rotation_diffeo(p_.inverse()); }

 private:
  Rotation p_;
};

class SqueezeDiffeo final : public DomainDiffeo {
 public:
  explicit SqueezeDiffeo(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("squeeze: lambda must be positive");
  }
  JetVec apply(const JetVec& d, DomainKind kind) const override {
    if (kind != DomainKind::Sphere) throw DomainError("squeeze: needs a sphere domain");
    const std::size_t last = d.size() - 1;
    const Jet& z = d[last];
    const double l2 = lambda_ * lambda_;
    const Jet inv = reciprocal((1.0 + l2) + (1.0 - l2) * z);
    JetVec out(d.size());
    for (std::size_t i = 0; i < last; ++i) out[i] = d[i] * (2.0 * lambda_) * inv;
    out[last] = ((1.0 + z) - l2 * (1.0 - z)) * inv;
    return out;
  }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(17);
    os << "squeeze(" << lambda_ << ")";
    return os.str();
  }
  DiffeoPtr inverse() const override { return squeeze_diffeo(1.0 / lambda_); }

 private:
  double lambda_;
};

class TorusShift final : public DomainDiffeo {
 public:
  TorusShift(double a, double b) : a_(a), b_(b) {}
  JetVec apply(const JetVec& d, DomainKind kind) const override {
    if (kind != DomainKind::Torus) throw DomainError("torus shift: needs a torus domain");
    return {d[0] + a_, d[1] + b_};
  }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(17);
    os << "shift(" << a_ << "," << b_ << ")";
    return os.str();
  }
  DiffeoPtr inverse() const override { return torus_shift(-a_, -b_); }

 private:
  double a_, b_;
};

class ComposedDiffeo final : public DomainDiffeo {
 public:
  ComposedDiffeo(DiffeoPtr outer, DiffeoPtr inner) : outer_(std::move(outer)), inner_(std::move(inner)) {}
  JetVec apply(const JetVec& d, DomainKind kind) const override {
    return outer_->apply(inner_->apply(d, kind), kind);
  }
  int depth() const override { return outer_->depth() + inner_->depth(); }
  int orientation() const override { return outer_->orientation() * inner_->orientation(); }
  std::string describe() const override { return outer_->describe() + " o " + inner_->describe(); }
  DiffeoPtr inverse() const override {
    auto a = outer_->inverse();
    auto b = inner_->inverse();
    if (!a || !b) return nullptr;
    return compose(b, a);
  }

 private:
  DiffeoPtr outer_, inner_;
};

class NodeDiffeo final : public DomainDiffeo {
 public:
  NodeDiffeo(NodePtr node, std::string label, int orientation)
      : node_(std::move(node)), label_(std::move(label)), orientation_(orientation) {}
  JetVec apply(const JetVec& d, DomainKind kind) const override { return node_->eval(d, kind); }
  int depth() const override { return node_->depth(); }
  int orientation() const override { return orientation_; }
  std::string describe() const override { return label_; }

 private:
  NodePtr node_;
  std::string label_;
  int orientation_;
};

}  // namespace

DiffeoPtr identity_diffeo() {
  static const DiffeoPtr id = std::make_shared<IdentityDiffeo>();
  return id;
}
DiffeoPtr rotation_diffeo(const Rotation& p) { return std::make_shared<RotationDiffeo>(p); }
DiffeoPtr squeeze_diffeo(double lambda) { return std::make_shared<SqueezeDiffeo>(lambda); }
DiffeoPtr torus_shift(double a, double b) { return std::make_shared<TorusShift>(a, b); }
DiffeoPtr compose(DiffeoPtr outer, DiffeoPtr inner) {
  return std::make_shared<ComposedDiffeo>(std::move(outer), std::move(inner));
}
DiffeoPtr node_diffeo(NodePtr node, std::string label, int orientation) {
  return std::make_shared<NodeDiffeo>(std::move(node), std::move(label), orientation);
}

// ---------------------------------------------------------------- sampled diffeo

SampledDiffeo::SampledDiffeo(DiffeoPtr map, DomainAtlas atlas) : map_(std::move(map)), atlas_(std::move(atlas)) {
  images_.resize(atlas_.size());
  const DomainKind kind = atlas_.kind();
  parallel_for(atlas_.size(), [&](std::size_t i) {
    images_[i] = to_eigen(map_->apply(atlas_.domain_jet(atlas_.samples()[i], map_->depth()), kind));
  });
  std::vector<Eigen::VectorXd> keyed = images_;
  if (kind == DomainKind::Torus) {
    for (auto& p : keyed) p = atlas_.locate(p).params;
  }
  hash_ = std::make_shared<SpatialHash>(std::move(keyed), 2.0 * atlas_.median_domain_spacing());
}

Eigen::VectorXd SampledDiffeo::inverse(const Eigen::VectorXd& target) const {
  const DomainKind kind = atlas_.kind();
  Eigen::VectorXd key = target;
  if (kind == DomainKind::Torus) key = atlas_.locate(target).params;
  const int seed = hash_->nearest(key);
  Sample x = atlas_.samples()[static_cast<std::size_t>(seed)];
  const int nv = static_cast<int>(x.params.size());

  // Gauss-Newton on the chart parameters of the seed's chart.
  for (int it = 0; it < 30; ++it) {
    const JetVec img = map_->apply(atlas_.domain_jet(x, 1 + map_->depth()), kind);
    Eigen::VectorXd res(static_cast<Eigen::Index>(img.size()));
    Matrix jac(static_cast<Eigen::Index>(img.size()), nv);
    for (std::size_t k = 0; k < img.size(); ++k) {
      res[k] = img[k].value() - target[k];
      if (kind == DomainKind::Torus) res[k] = wrap_angle(res[k]);
      for (int j = 0; j < nv; ++j) jac(k, j) = img[k].partial(j);
    }
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-res);
    x.params += step;
    if (step.norm() < 1e-15) break;
  }
  return atlas_.domain_point(x);
}

double SampledDiffeo::max_roundtrip_error() const {
  std::vector<double> err(atlas_.size());
  parallel_for(atlas_.size(), [&](std::size_t i) {
    err[i] = atlas_.domain_distance(inverse(images_[i]), atlas_.domain_point(i));
  });
  return *std::max_element(err.begin(), err.end());
}

double SampledDiffeo::min_jacobian_determinant() const {
  const DomainKind kind = atlas_.kind();
  std::vector<double> det(atlas_.size());
  parallel_for(atlas_.size(), [&](std::size_t i) {
    const JetVec dom = atlas_.domain_jet(atlas_.samples()[i], 1 + map_->depth());
    const JetVec img = map_->apply(dom, kind);
    const int nv = dom[0].nvars();
    if (kind == DomainKind::Torus) {
      Matrix a(2, 2), b(2, 2);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          a(r, c) = img[r].partial(c);
          b(r, c) = dom[r].partial(c);
        }
      det[i] = a.determinant() / b.determinant();
    } else {
      // Ratio of det[d g, g] to det[d p, p]: the Jacobian determinant of g
      // relative to the standard orientation of S^n.
      const auto d = static_cast<Eigen::Index>(dom.size());
      Matrix a(d, d), b(d, d);
      for (Eigen::Index r = 0; r < d; ++r) {
        for (int c = 0; c < nv; ++c) {
          a(r, c) = img[r].partial(c);
          b(r, c) = dom[r].partial(c);
        }
        a(r, nv) = img[r].value();
        b(r, nv) = dom[r].value();
      }
      det[i] = a.determinant() / b.determinant();
    }
  });
  return *std::min_element(det.begin(), det.end());
}

// ---------------------------------------------------------------- nodes

namespace {

class RoundNode final : public ImmersionNode {
 public:
  RoundNode(int n, double r, Rotation q, DiffeoPtr g) : n_(n), r_(r), q_(std::move(q)), g_(std::move(g)) {}
  JetVec eval(const JetVec& domain, DomainKind kind) const override {
    const JetVec p = g_->apply(domain, kind);
    JetVec out = maps::iota(r_, p);
    if (q_.matrix().isIdentity(0.0)) return out;
    return maps::apply(q_.matrix(), out);
  }
  int depth() const override { return g_->depth(); }
  int output_dim() const override { return n_ + 2; }
  Ambient ambient() const override { return Ambient::Sphere; }

 private:
  int n_;
  double r_;
  Rotation q_;
  DiffeoPtr g_;
};

class CliffordNode final : public ImmersionNode {
 public:
  CliffordNode(int a, int b) : a_(a), b_(b) {}
  JetVec eval(const JetVec& d, DomainKind) const override {
    const double s = std::sqrt(0.5);
    const Jet u = d[0] * static_cast<double>(a_);
    const Jet v = d[1] * static_cast<double>(b_);
    return {cos(u) * s, sin(u) * s, cos(v) * s, sin(v) * s};
  }
  int depth() const override { return 0; }
  int output_dim() const override { return 4; }
  Ambient ambient() const override { return Ambient::Sphere; }

 private:
  int a_, b_;
};

template <class S>
S radial_profile(RadialProfile h, const std::vector<S>& p) {
  const std::size_t last = p.size() - 1;
  switch (h) {
    case RadialProfile::Quadric:
      return p[0] * p[0] - p[1] * p[1] + 0.5 * (p[0] * p[last]);
    case RadialProfile::Cubic:
      return p[0] * p[0] * p[0] - 3.0 * (p[0] * p[1] * p[1]) + p[last];
  }
  return S(0.0);
}

class RadialGraphNode final : public ImmersionNode {
 public:
  RadialGraphNode(int n, double r0, double eps, RadialProfile h) : n_(n), r0_(r0), eps_(eps), h_(h) {}
  JetVec eval(const JetVec& p, DomainKind) const override {
    const Jet rho = radial_profile(h_, p) * eps_ + r0_;
    return maps::iota_variable(rho, p);
  }
  int depth() const override { return 0; }
  int output_dim() const override { return n_ + 2; }
  Ambient ambient() const override { return Ambient::Sphere; }

 private:
  int n_;
  double r0_, eps_;
  RadialProfile h_;
};

class EuclideanSphereNode final : public ImmersionNode {
 public:
  EuclideanSphereNode(int n, double radius) : n_(n), radius_(radius) {}
  JetVec eval(const JetVec& p, DomainKind) const override {
    JetVec out(p);
    for (auto& x : out) x *= radius_;
    return out;
  }
  int depth() const override { return 0; }
  int output_dim() const override { return n_ + 1; }
  Ambient ambient() const override { return Ambient::Euclidean; }

 private:
  int n_;
  double radius_;
};

class EuclideanPlaneNode final : public ImmersionNode {
 public:
  JetVec eval(const JetVec& d, DomainKind) const override { return {d[0], d[1], Jet(0.0)}; }
  int depth() const override { return 0; }
  int output_dim() const override { return 3; }
  Ambient ambient() const override { return Ambient::Euclidean; }
};

class RotateNode final : public ImmersionNode {
 public:
  RotateNode(NodePtr child, Rotation q) : child_(std::move(child)), q_(std::move(q)) {}
  JetVec eval(const JetVec& d, DomainKind kind) const override {
    return maps::apply(q_.matrix(), child_->eval(d, kind));
  }
  int depth() const override { return child_->depth(); }
  int output_dim() const override { return child_->output_dim(); }
  Ambient ambient() const override { return child_->ambient(); }

 private:
  NodePtr child_;
  Rotation q_;
};

class PrecomposeNode final : public ImmersionNode {
 public:
  PrecomposeNode(NodePtr child, DiffeoPtr g) : child_(std::move(child)), g_(std::move(g)) {}
  JetVec eval(const JetVec& d, DomainKind kind) const override {
    return child_->eval(g_->apply(d, kind), kind);
  }
  int depth() const override { return child_->depth() + g_->depth(); }
  int output_dim() const override { return child_->output_dim(); }
  Ambient ambient() const override { return child_->ambient(); }

 private:
  NodePtr child_;
  DiffeoPtr g_;
};

}  // namespace

NodePtr rotate_node(NodePtr child, const Rotation& q) { return std::make_shared<RotateNode>(std::move(child), q); }
NodePtr precompose_node(NodePtr child, DiffeoPtr g) {
  return std::make_shared<PrecomposeNode>(std::move(child), std::move(g));
}

std::string describe_sample(const Sample& x) {
  std::ostringstream os;
  os.precision(6);
  os << "chart " << x.chart << " (";
  for (Eigen::Index i = 0; i < x.params.size(); ++i) os << (i ? ", " : "") << x.params[i];
  os << ")";
  return os.str();
}

// ---------------------------------------------------------------- immersion

Immersion::Immersion(DomainAtlas atlas, NodePtr node, json provenance, DiffMode mode)
    : atlas_(std::move(atlas)), node_(std::move(node)), provenance_(std::move(provenance)), mode_(mode) {}

Immersion Immersion::with_diff_mode(DiffMode mode) const {
  Immersion out = *this;
  out.mode_ = mode;
  return out;
}

JetVec Immersion::jet(const Sample& x, int order) const {
  const int total = order + depth();
  const int nv = static_cast<int>(x.params.size());
  if (total > max_jet_order(nv)) throw NumericError("immersion: requested jet order exceeds capacity");
  JetVec out = node_->eval(atlas_.domain_jet(x, total), atlas_.kind());
  for (auto& c : out) c = c.truncated(order);
  return out;
}

Eigen::VectorXd Immersion::point(const Sample& x) const { return to_eigen(jet(x, 0)); }

std::vector<Eigen::VectorXd> Immersion::points() const {
  std::vector<Eigen::VectorXd> out(atlas_.size());
  parallel_for(atlas_.size(), [&](std::size_t i) { out[i] = point(i); });
  return out;
}

namespace {

Eigen::VectorXd shifted_point(const Immersion& f, const Sample& x, int i, double hi, int j = 0, double hj = 0.0) {
  Sample y = x;
  y.params[i] += hi;
  if (hj != 0.0) y.params[j] += hj;
  return f.point(y);
}

Matrix numeric_jacobian(const Immersion& f, const Sample& x, double h) {
  const int n = static_cast<int>(x.params.size());
  Matrix out(f.ambient_dim(), n);
  for (int i = 0; i < n; ++i) {
    out.col(i) = (shifted_point(f, x, i, h) - shifted_point(f, x, i, -h)) / (2.0 * h);
  }
  return out;
}

std::vector<AmbientVector> numeric_hessian(const Immersion& f, const Sample& x, double h) {
  const int n = static_cast<int>(x.params.size());
  const Eigen::VectorXd f0 = f.point(x);
  std::vector<AmbientVector> out(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    out[i * n + i] = (shifted_point(f, x, i, h) - 2.0 * f0 + shifted_point(f, x, i, -h)) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      const Eigen::VectorXd v = (shifted_point(f, x, i, h, j, h) - shifted_point(f, x, i, h, j, -h) -
                                 shifted_point(f, x, i, -h, j, h) + shifted_point(f, x, i, -h, j, -h)) /
                                (4.0 * h * h);
      out[i * n + j] = v;
      out[j * n + i] = v;
    }
  }
  return out;
}

}  // namespace

Matrix jacobian(const Immersion& f, const Sample& x) {
  const int n = static_cast<int>(x.params.size());
  if (f.diff_mode() == DiffMode::Numeric) {
    constexpr double h = 1e-5;
    return (4.0 * numeric_jacobian(f, x, h / 2.0) - numeric_jacobian(f, x, h)) / 3.0;
  }
  const JetVec j = f.jet(x, 1);
  Matrix out(static_cast<Eigen::Index>(j.size()), n);
  for (std::size_t k = 0; k < j.size(); ++k)
    for (int i = 0; i < n; ++i) out(k, i) = j[k].partial(i);
  return out;
}

std::vector<AmbientVector> hessian(const Immersion& f, const Sample& x) {
  const int n = static_cast<int>(x.params.size());
  if (f.diff_mode() == DiffMode::Numeric) {
    constexpr double h = 1e-3;
    auto coarse = numeric_hessian(f, x, h);
    auto fine = numeric_hessian(f, x, h / 2.0);
    for (std::size_t k = 0; k < fine.size(); ++k) fine[k] = (4.0 * fine[k] - coarse[k]) / 3.0;
    return fine;
  }
  const JetVec j = f.jet(x, 2);
  std::vector<AmbientVector> out(static_cast<std::size_t>(n * n), AmbientVector(j.size()));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (std::size_t k = 0; k < j.size(); ++k) out[a * n + b][k] = j[k].second(a, b);
  return out;
}

double rank_margin(const Immersion& f, const Sample& x) {
  const Eigen::JacobiSVD<Matrix> svd(jacobian(f, x));
  const auto& s = svd.singularValues();
  if (!(s[0] > 0.0)) return 0.0;
  return s[s.size() - 1] / s[0];
}

void check_rank(const Immersion& f) {
  std::vector<double> margin(f.atlas().size());
  parallel_for(margin.size(), [&](std::size_t i) { margin[i] = rank_margin(f, f.atlas().samples()[i]); });
  for (std::size_t i = 0; i < margin.size(); ++i) {
    if (!(margin[i] >= kRankTolerance)) {
      std::ostringstream os;
      os << "rank check failed at sample " << i << " [" << describe_sample(f.atlas().samples()[i])
         << "]: singular-value ratio " << margin[i];
      throw DegeneracyError(os.str());
    }
  }
}

// ---------------------------------------------------------------- families

Immersion family_round(int n, double r, const Rotation& q, DiffeoPtr g, int resolution) {
  if (!(r > 0.0 && r < std::numbers::pi)) throw DomainError("family_round: r outside (0, pi)");
  if (q.dim() != n + 2) throw DomainError("family_round: rotation dimension must be n + 2");
  json prov = {{"family", "round"}, {"n", n}, {"r", r}, {"g", g->describe()}};
  if (!q.matrix().isIdentity(0.0)) prov["rotated"] = true;
  return Immersion(DomainAtlas::sphere(n, resolution), std::make_shared<RoundNode>(n, r, q, std::move(g)),
                   std::move(prov));
}

Immersion family_clifford(int a, int b, int resolution) {
  if (a < 1 || b < 1) throw DomainError("family_clifford: wrap degrees must be positive");
  return Immersion(DomainAtlas::torus(resolution), std::make_shared<CliffordNode>(a, b),
                   {{"family", "clifford"}, {"wrap", {a, b}}});
}

Immersion family_radial_graph(int n, double r0, double eps, RadialProfile h, int resolution) {
  if (!(r0 > 0.0 && r0 < std::numbers::pi)) throw DomainError("family_radial_graph: r0 outside (0, pi)");
  Immersion f(DomainAtlas::sphere(n, resolution), std::make_shared<RadialGraphNode>(n, r0, eps, h),
              {{"family", "radial_graph"}, {"n", n}, {"r0", r0}, {"eps", eps}, {"h", to_string(h)}});
  check_rank(f);
  return f;
}

Immersion euclidean_sphere(int n, double radius, int resolution) {
  if (!(radius > 0.0)) throw DomainError("euclidean_sphere: radius must be positive");
  return Immersion(DomainAtlas::sphere(n, resolution), std::make_shared<EuclideanSphereNode>(n, radius),
                   {{"family", "euclidean_sphere"}, {"n", n}, {"radius", radius}});
}

Immersion euclidean_plane(int resolution) {
  return Immersion(DomainAtlas::torus(resolution), std::make_shared<EuclideanPlaneNode>(),
                   {{"family", "euclidean_plane"}});
}

Immersion precompose(const Immersion& f, DiffeoPtr g) {
  json prov = {{"op", "precompose"}, {"g", g->describe()}, {"orientation", g->orientation()},
               {"of", f.provenance()}};
  return Immersion(f.atlas(), precompose_node(f.node(), std::move(g)), std::move(prov), f.diff_mode());
}

Immersion postcompose_rotation(const Immersion& f, const Rotation& q) {
  if (q.dim() != f.ambient_dim()) throw DomainError("postcompose_rotation: dimension mismatch");
  return Immersion(f.atlas(), rotate_node(f.node(), q), {{"op", "rotate"}, {"of", f.provenance()}},
                   f.diff_mode());
}

std::string to_string(RadialProfile h) { return h == RadialProfile::Quadric ? "quadric" : "cubic"; }

RadialProfile radial_profile_from_string(const std::string& s) {
  if (s == "quadric") return RadialProfile::Quadric;
  if (s == "cubic") return RadialProfile::Cubic;
  throw SchemaError("unknown radial profile '" + s + "' (expected quadric or cubic)");
}

}  // namespace spherelab
