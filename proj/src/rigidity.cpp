#include "spherelab/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "spherelab/curvature.hpp"
#include "spherelab/errors.hpp"
#include "spherelab/operators.hpp"
#include "spherelab/parallel.hpp"
#include "spherelab/spatial_hash.hpp"

namespace spherelab {

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0), components_(n) {
  std::iota(parent_.begin(), parent_.end(), 0);
}

int UnionFind::find(int a) {
  while (parent_[a] != a) {
    parent_[a] = parent_[parent_[a]];
    a = parent_[a];
  }
  return a;
}

bool UnionFind::unite(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  --components_;
  return true;
}

SampledHypersurface sample_hypersurface(const Immersion& f) {
  SampledHypersurface out;
  out.points = f.points();
  out.adjacency = &f.atlas().adjacency();
  out.source = f.provenance();
  std::vector<double> lengths;
  for (std::size_t a = 0; a < out.points.size(); ++a)
    for (int b : (*out.adjacency)[a])
      if (static_cast<std::size_t>(b) > a) lengths.push_back((out.points[a] - out.points[b]).norm());
  std::nth_element(lengths.begin(), lengths.begin() + lengths.size() / 2, lengths.end());
  out.median_spacing = lengths[lengths.size() / 2];
  return out;
}

namespace {

// Samples within `cap` grid hops of `from` (including it), sorted.
std::vector<int> hop_ball(const std::vector<std::vector<int>>& adj, int from, int cap) {
  std::vector<int> seen{from};
  std::vector<int> frontier{from};
  for (int step = 0; step < cap && !frontier.empty(); ++step) {
    std::vector<int> next;
    for (int u : frontier)
      for (int v : adj[u])
        if (std::find(seen.begin(), seen.end(), v) == seen.end()) {
          seen.push_back(v);
          next.push_back(v);
        }
    frontier = std::move(next);
  }
  std::sort(seen.begin(), seen.end());
  return seen;
}

// Number of groups of samples, two samples sharing a group when they are
// within `cap` hops of each other (transitively through the set).
int count_sheets(const std::vector<std::vector<int>>& adj, std::vector<int> items, int cap) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  int groups = 0;
  std::vector<char> done(items.size(), 0);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (done[i]) continue;
    ++groups;
    std::vector<std::size_t> stack{i};
    done[i] = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      const std::vector<int> ball = hop_ball(adj, items[u], cap);
      for (std::size_t j = 0; j < items.size(); ++j) {
        if (!done[j] && std::binary_search(ball.begin(), ball.end(), items[j])) {
          done[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  return groups;
}

struct Refined {
  Sample x, y;
  double distance;
};

// Damped Gauss-Newton (Levenberg-Marquardt) on |f(x) - f(y)|^2 in the chart
// parameters of both seeds.
Refined refine_pair(const Immersion& f, const Sample& x0, const Sample& y0) {
  Sample x = x0, y = y0;
  AmbientVector r = f.point(x) - f.point(y);
  double cost = r.squaredNorm();
  const auto n = x.params.size();
  double lambda = -1.0;
  for (int it = 0; it < 20 && cost > 1e-28; ++it) {
    Matrix a(r.size(), 2 * n);
    a.leftCols(n) = jacobian(f, x);
    a.rightCols(n) = -jacobian(f, y);
    const Matrix ata = a.transpose() * a;
    const Eigen::VectorXd g = a.transpose() * r;
    if (lambda < 0.0) lambda = 1e-3 * ata.trace() / static_cast<double>(2 * n);
    bool improved = false;
    for (int tries = 0; tries < 8 && !improved; ++tries) {
      Matrix m = ata;
      m.diagonal().array() += lambda;
      const Eigen::VectorXd step = m.ldlt().solve(-g);
      Sample xt = x, yt = y;
      xt.params += step.head(n);
      yt.params += step.tail(n);
      const AmbientVector rt = f.point(xt) - f.point(yt);
      if (rt.squaredNorm() < cost) {
        x = xt;
        y = yt;
        r = rt;
        cost = rt.squaredNorm();
        lambda /= 3.0;
        improved = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!improved) break;
  }
  return {x, y, std::sqrt(cost)};
}

}  // namespace

IntersectionReport self_intersections(const Immersion& f, double eps, int delta) {
  const SampledHypersurface hs = sample_hypersurface(f);
  const auto& adj = *hs.adjacency;
  const DomainAtlas& atlas = f.atlas();
  IntersectionReport out;
  out.eps = eps;
  out.delta = delta;
  out.median_spacing = hs.median_spacing;
  if (hs.median_spacing > eps) {
    std::ostringstream os;
    os << "resolution-insufficient: median sample spacing " << hs.median_spacing << " exceeds eps " << eps
       << "; candidates are gathered at the sample scale and refined";
    out.warnings.push_back(os.str());
  }
  const double cell = 2.0 * hs.median_spacing;
  const SpatialHash hash(hs.points, cell);
  const std::size_t count = hs.points.size();

  std::vector<std::vector<int>> candidates(count);
  parallel_for(count, [&](std::size_t i) {
    std::vector<int> near;
    for (int j : hash.neighbors(hs.points[i])) {
      if (static_cast<std::size_t>(j) <= i) continue;
      if ((hs.points[j] - hs.points[i]).norm() < cell) near.push_back(j);
    }
    if (near.empty()) return;
    const std::vector<int> ball = hop_ball(adj, static_cast<int>(i), delta);
    for (int j : near)
      if (!std::binary_search(ball.begin(), ball.end(), j)) candidates[i].push_back(j);
  });

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < count; ++i)
    for (int j : candidates[i]) pairs.emplace_back(static_cast<int>(i), j);

  // Refined points that slid back together were a metric artefact, not a crossing.
  const double min_separation = 0.5 * delta * atlas.median_domain_spacing();
  std::vector<Refined> refined(pairs.size());
  std::vector<char> accepted(pairs.size(), 0), suspect(pairs.size(), 0);
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [a, b] = pairs[k];
    refined[k] = refine_pair(f, atlas.samples()[a], atlas.samples()[b]);
    const double sep = atlas.domain_distance(atlas.domain_point(refined[k].x), atlas.domain_point(refined[k].y));
    const double seed_distance = (hs.points[a] - hs.points[b]).norm();
    if (sep < min_separation) return;
    if (refined[k].distance < eps) {
      accepted[k] = 1;
    } else if (std::min(seed_distance, refined[k].distance) < 10.0 * eps) {
      suspect[k] = 1;
    }
  });

  UnionFind uf(count);
  std::vector<std::vector<int>> partners(count);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!accepted[k]) continue;
    uf.unite(pairs[k].first, pairs[k].second);
    partners[pairs[k].first].push_back(pairs[k].second);
    partners[pairs[k].second].push_back(pairs[k].first);
  }
  std::vector<int> cluster_of(count, -1);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [a, b] = pairs[k];
    IntersectionPair p{a, b, refined[k].x, refined[k].y, refined[k].distance};
    if (accepted[k]) {
      const int root = uf.find(a);
      if (cluster_of[root] < 0) {
        cluster_of[root] = static_cast<int>(out.clusters.size());
        out.clusters.emplace_back();
      }
      out.clusters[cluster_of[root]].push_back(p);
    } else if (suspect[k]) {
      out.suspects.push_back(p);
    }
  }

  std::vector<int> sheets(count, 0);
  parallel_for(count, [&](std::size_t i) {
    if (!partners[i].empty()) sheets[i] = count_sheets(adj, partners[i], delta);
  });
  out.m = 1 + *std::max_element(sheets.begin(), sheets.end());
  out.embedded = out.clusters.empty();
  return out;
}

IntersectionReport dual_embedding_check(const Immersion& f, double eps, int delta) {
  return self_intersections(dual(f), eps, delta);
}

json to_json(const IntersectionReport& r) {
  json clusters = json::array();
  for (const auto& c : r.clusters) {
    double dmin = 1e300, dmax = 0.0;
    for (const auto& p : c) {
      dmin = std::min(dmin, p.distance);
      dmax = std::max(dmax, p.distance);
    }
    const auto& p = c.front();
    clusters.push_back({{"pairs", c.size()},
                        {"min_distance", dmin},
                        {"max_distance", dmax},
                        {"example", {{"x", describe_sample(p.xa)}, {"y", describe_sample(p.xb)}}}});
  }
  return {{"embedded", r.embedded},
          {"m", r.m},
          {"clusters", clusters},
          {"suspects", r.suspects.size()},
          {"eps", r.eps},
          {"delta", r.delta},
          {"median_spacing", r.median_spacing},
          {"warnings", r.warnings}};
}

// ---------------------------------------------------------------- deck groups

FreeActionReport validate_free_action(const std::vector<Rotation>& elements, int samples, unsigned seed) {
  FreeActionReport out;
  out.min_singular = 1e300;
  out.min_displacement = 1e300;
  const int d = elements.front().dim();
  std::vector<AmbientVector> pts;
  // Structured grid with odd resolution (so coordinate-plane points are present),
  // plus random points.
  {
    constexpr int kRes = 15;
    const int cells = static_cast<int>(std::pow(kRes, d - 1));
    for (int face = 0; face < 2 * d; ++face) {
      for (int c = 0; c < cells; ++c) {
        AmbientVector v(d);
        v[face / 2] = face % 2 == 0 ? 1.0 : -1.0;
        for (int k = 0, rest = c; k < d; ++k) {
          if (k == face / 2) continue;
          const double x = -1.0 + (2.0 * (rest % kRes) + 1.0) / kRes;
          rest /= kRes;
          v[k] = std::tan(std::numbers::pi / 4 * x);
        }
        pts.push_back(v.normalized());
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < samples; ++k) {
    AmbientVector v(d);
    for (int i = 0; i < d; ++i) v[i] = gauss(rng);
    pts.push_back(v.normalized());
  }
  for (const auto& g : elements) {
    if (g.matrix().isIdentity(1e-10)) continue;
    const Matrix m = g.matrix() - Matrix::Identity(d, d);
    const Eigen::JacobiSVD<Matrix> svd(m);
    out.min_singular = std::min(out.min_singular, svd.singularValues()[d - 1]);
    for (const auto& p : pts) out.min_displacement = std::min(out.min_displacement, (m * p).norm());
  }
  out.free = out.min_singular > 1e-10;
  return out;
}

DeckGroup make_deck_group(std::string name, std::vector<Rotation> elements) {
  if (elements.empty()) throw DomainError("deck group: no elements");
  const auto same = [](const Rotation& a, const Rotation& b) {
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= 1e-10;
  };
  const Rotation id = Rotation::identity(elements.front().dim());
  if (std::none_of(elements.begin(), elements.end(), [&](const Rotation& g) { return same(g, id); })) {
    throw DomainError("deck group " + name + ": identity missing");
  }
  for (const auto& a : elements)
    for (const auto& b : elements) {
      const Rotation ab = a * b;
      if (std::none_of(elements.begin(), elements.end(), [&](const Rotation& g) { return same(g, ab); })) {
        throw DomainError("deck group " + name + ": not closed under multiplication");
      }
    }
  if (elements.size() > 1) {
    const FreeActionReport fr = validate_free_action(elements);
    if (!fr.free) {
      std::ostringstream os;
      os << "deck group " << name << ": action is not free (smallest singular value of g - I is "
         << fr.min_singular << ")";
      throw DomainError(os.str());
    }
  }
  return {std::move(name), std::move(elements)};
}

DeckGroup deck_trivial(int n) { return make_deck_group("trivial", {Rotation::identity(n + 2)}); }

DeckGroup deck_antipodal(int n) {
  if ((n + 2) % 2 != 0) throw DomainError("deck_antipodal: needs an even ambient dimension n + 2");
  return make_deck_group("antipodal", {Rotation::identity(n + 2), Rotation(-Matrix::Identity(n + 2, n + 2))});
}

DeckGroup deck_lens(int p, int q) {
  if (p < 2) throw DomainError("deck_lens: p must be at least 2");
  const double a = 2.0 * std::numbers::pi / p;
  const double b = 2.0 * std::numbers::pi * q / p;
  std::vector<Rotation> elements;
  for (int k = 0; k < p; ++k) {
    Matrix m = Matrix::Zero(4, 4);
    m.topLeftCorner(2, 2) << std::cos(k * a), -std::sin(k * a), std::sin(k * a), std::cos(k * a);
    m.bottomRightCorner(2, 2) << std::cos(k * b), -std::sin(k * b), std::sin(k * b), std::cos(k * b);
    elements.emplace_back(m);
  }
  std::ostringstream name;
  name << "lens(" << p << "," << q << ")";
  return make_deck_group(name.str(), std::move(elements));
}

DeckGroup deck_from_string(const std::string& spec, int n) {
  if (spec == "trivial") return deck_trivial(n);
  if (spec == "antipodal") return deck_antipodal(n);
  if (spec.rfind("lens:", 0) == 0) {
    int p = 0, q = 0;
    char comma = 0;
    std::istringstream is(spec.substr(5));
    if (!(is >> p >> comma >> q) || comma != ',') throw SchemaError("deck: expected lens:p,q, got " + spec);
    if (n != 2) throw DomainError("deck_lens: only n = 2");
    return deck_lens(p, q);
  }
  throw SchemaError("unknown deck group '" + spec + "' (expected trivial, antipodal or lens:p,q)");
}

// ---------------------------------------------------------------- covering counts

namespace {

std::size_t count_components(const std::vector<AmbientVector>& pts, double eps, UnionFind* keep = nullptr) {
  const SpatialHash hash(pts, eps);
  UnionFind uf(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int j : hash.neighbors(pts[i]))
      if (static_cast<std::size_t>(j) > i && (pts[i] - pts[j]).norm() < eps) uf.unite(static_cast<int>(i), j);
  if (keep) *keep = uf;
  return uf.components();
}

double one_sided_hausdorff(const std::vector<AmbientVector>& from, const SpatialHash& to) {
  std::vector<double> d(from.size());
  parallel_for(from.size(), [&](std::size_t i) { d[i] = (to.points()[to.nearest(from[i])] - from[i]).norm(); });
  return *std::max_element(d.begin(), d.end());
}

}  // namespace

PreimageReport preimage_components(const Immersion& f, const DeckGroup& gamma, double eps_link) {
  const SampledHypersurface hs = sample_hypersurface(f);
  PreimageReport out;
  out.gamma_order = gamma.order();
  out.eps_link = eps_link > 0.0 ? eps_link : 3.0 * hs.median_spacing;
  const std::size_t n = hs.points.size();
  std::vector<AmbientVector> all;
  all.reserve(n * gamma.elements.size());
  for (const auto& g : gamma.elements)
    for (const auto& p : hs.points) all.push_back(g.matrix() * p);

  UnionFind uf(0);
  const std::size_t k = count_components(all, out.eps_link, &uf);
  const std::size_t k_lo = count_components(all, 0.8 * out.eps_link);
  const std::size_t k_hi = count_components(all, 1.2 * out.eps_link);
  if (k_lo != k || k_hi != k) {
    std::ostringstream os;
    os << "ambiguous linking: component count " << k << " changes to " << k_lo << " / " << k_hi
       << " under eps_link -/+20%";
    throw ResolutionError(os.str());
  }
  out.k = static_cast<int>(k);

  // Component containing the identity copy of sample 0.
  const int root = uf.find(0);
  std::vector<AmbientVector> c0;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (uf.find(static_cast<int>(i)) == root) c0.push_back(all[i]);
  const SpatialHash c0_hash(c0, out.eps_link);
  for (const auto& g : gamma.elements) {
    std::vector<AmbientVector> moved(c0.size());
    for (std::size_t i = 0; i < c0.size(); ++i) moved[i] = g.matrix() * c0[i];
    if (one_sided_hausdorff(moved, c0_hash) < out.eps_link) ++out.gc_order;
  }
  out.identity_holds = out.k * out.gc_order == out.gamma_order;
  return out;
}

json to_json(const PreimageReport& r) {
  return {{"k", r.k}, {"gc_order", r.gc_order}, {"gamma_order", r.gamma_order},
          {"identity_holds", r.identity_holds}, {"eps_link", r.eps_link}};
}

MultiplicityReport multiplicity_bound_check(const Immersion& f, const DeckGroup& gamma) {
  MultiplicityReport out;
  out.gamma_order = gamma.order();
  const HypothesisReport h = classify(f);
  if (!h.width_below_half_pi || h.contains_zero) {
    std::ostringstream os;
    os << "hypothesis fails: J(f) width " << h.j.interval.width()
       << (h.width_below_half_pi ? "" : " is not below pi/2") << (h.contains_zero ? ", J(f) contains 0 mod pi" : "")
       << "; check skipped";
    out.skipped = true;
    out.reason = os.str();
    return out;
  }
  const SampledHypersurface hs = sample_hypersurface(f);
  const auto& adj = *hs.adjacency;
  const double eps = 2.0 * hs.median_spacing;
  const SpatialHash hash(hs.points, eps);

  std::vector<Matrix> inverses;
  for (const auto& g : gamma.elements) inverses.push_back(g.matrix().transpose());
  std::vector<int> preimages(hs.points.size(), 0);
  parallel_for(hs.points.size(), [&](std::size_t i) {
    std::vector<int> hits;
    for (const auto& ginv : inverses) {
      const AmbientVector target = ginv * hs.points[i];
      for (int j : hash.neighbors(target))
        if ((hs.points[j] - target).norm() < eps) hits.push_back(j);
    }
    preimages[i] = count_sheets(adj, hits, kIntersectionDelta);
  });
  out.m_identified = *std::max_element(preimages.begin(), preimages.end());

  for (const auto& g : gamma.elements) {
    std::vector<AmbientVector> moved(hs.points.size());
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] = g.matrix() * hs.points[i];
    if (one_sided_hausdorff(moved, hash) < eps) ++out.symmetry_order;
  }
  out.m = out.m_identified / out.symmetry_order;
  out.bound_holds = out.m * out.symmetry_order <= out.gamma_order;
  return out;
}

json to_json(const MultiplicityReport& r) {
  json j = {{"skipped", r.skipped}, {"gamma_order", r.gamma_order}};
  if (r.skipped) {
    j["reason"] = r.reason;
  } else {
    j["m"] = r.m;
    j["m_identified"] = r.m_identified;
    j["symmetry_order"] = r.symmetry_order;
    j["bound_holds"] = r.bound_holds;
  }
  return j;
}

FactorReport irreducible_factor(const Immersion& f) {
  FactorReport out;
  out.factor = f.provenance();
  const json& prov = f.provenance();
  if (!prov.contains("family") || prov["family"] != "clifford") return out;
  const int a = prov["wrap"][0], b = prov["wrap"][1];
  const DomainAtlas& atlas = f.atlas();
  int ka = 0, lb = 0;
  out.symmetry_order = 0;
  for (int k = 0; k < a; ++k) {
    for (int l = 0; l < b; ++l) {
      double worst = 0.0;
      for (const auto& x : atlas.samples()) {
        Sample y = x;
        y.params[0] += 2.0 * std::numbers::pi * k / a;
        y.params[1] += 2.0 * std::numbers::pi * l / b;
        worst = std::max(worst, (f.point(y) - f.point(x)).norm());
      }
      if (worst < 1e-10) {
        ++out.symmetry_order;
        if (l == 0) ++ka;
        if (k == 0) ++lb;
      }
    }
  }
  out.factor = {{"family", "clifford"}, {"wrap", {a / ka, b / lb}}};
  return out;
}

}  // namespace spherelab
