#pragma once

#include <vector>

#include "spherelab/curvature.hpp"
#include "spherelab/immersion.hpp"

namespace spherelab {

// Margins turning the strict inequalities of the preconditions into numbers.
inline constexpr double kRadiusMargin = 1e-4;
inline constexpr double kCurvatureMargin = 1e-4;
inline constexpr double kHemisphereMargin = 1e-6;

// ---- expression nodes shared with the homotopy module

// Unit normal of the child, with the orientation convention of gauss_jet.
NodePtr gauss_node(NodePtr child);
// cos r f + sin r nu_f.
NodePtr translate_node(NodePtr child, double r);
// M_s with contraction centre c.
NodePtr moebius_node(NodePtr child, const SpherePoint& c, double s);
// Q zeta_s Q^{-1} f.
NodePtr zeta_conj_node(NodePtr child, const Rotation& q, double s);
// tau(Q^{-1} f) in R^{n+1}.
NodePtr tau_node(NodePtr child, const Rotation& q);
// pi(Q^{-1} f) in E^{n+1}.
NodePtr central_node(NodePtr child, const Rotation& q);
// Q pi^{-1}(phi) back on the sphere.
NodePtr central_inverse_node(NodePtr child, const Rotation& q);
// (1 - s) phi + s tan(r) nu_phi for a Euclidean child.
NodePtr straight_line_node(NodePtr child, double r, double s);

// ---- operators

// l = #{principal radii rho : sin rho sin(rho - r) < 0}, taken at the first sample.
int translate_l(const std::vector<CurvatureSample>& spec, double r);

// f_r = cos r f + sin r nu_f. Throws DegeneracyError when r mod pi lies within
// `margin` of a principal radius of f.
Immersion normal_translate(const Immersion& f, double r, double margin = kRadiusMargin);
// Same, reusing a spectrum of f that the caller already has.
Immersion normal_translate(const Immersion& f, double r, const std::vector<CurvatureSample>& spec,
                           double margin = kRadiusMargin);

// f* = nu_f as a sphere map. Throws DegeneracyError at a flat point (|kappa| <= margin).
Immersion dual(const Immersion& f, double margin = kCurvatureMargin);
Immersion dual(const Immersion& f, const std::vector<CurvatureSample>& spec,
               double margin = kCurvatureMargin);

// F(p, t) = cos t f(p) + sin t f*(p).
AmbientVector hemisphere_locus(const Immersion& f, const Immersion& fstar, const Sample& x, double t);

struct Circumcap {
  SpherePoint center;
  double radius;
};
// Minimal enclosing cap, via the minimal enclosing Euclidean ball of the
// points. Throws HypothesisError ("not hemispherical") unless
// radius < pi/2 - kHemisphereMargin.
Circumcap circumcenter(const std::vector<AmbientVector>& points);
// Minimal enclosing Euclidean ball (exact, move-to-front), for tests.
struct Ball {
  AmbientVector center;
  double radius;
};
Ball minimal_enclosing_ball(const std::vector<AmbientVector>& points, unsigned seed = 1);

// M_s o f with contraction centre c, s in (0, 1].
Immersion apply_moebius(const Immersion& f, const SpherePoint& c, double s);

struct MoebiusStep {
  double s;
  double mu;
  CircleInterval j;
  bool embedded_checked = false;
  bool embedded = false;
};
struct MoebiusMonitor {
  SpherePoint center;
  std::vector<MoebiusStep> steps;
  // mu strictly increases as s decreases along the grid.
  bool strictly_increasing = false;
};
// Requires f locally convex. The centre is the circumcenter of f's samples.
// s_grid must be decreasing.
MoebiusMonitor moebius_flow_monitor(const Immersion& f, const std::vector<double>& s_grid,
                                    bool check_embedding = false);
json to_json(const MoebiusMonitor& m);
// 1, 1 - step, ..., down to s_min inclusive.
std::vector<double> decreasing_grid(double s_min, double step);

// Element [Q, g] of SO(n+2) x Diff+(S^n) / SO(n+1).
struct TwistedClass {
  Rotation q;
  DiffeoPtr g;
  bool canonical = false;
};
// Representative with Q = rotation_to(Q(-e_{n+2})); the block Q_c^{-1} Q is
// moved onto g.
TwistedClass canonicalize(const Rotation& q, const DiffeoPtr& g);
// Largest |Q1 - Q2| entry and largest pointwise |g1 - g2| over the atlas samples,
// after canonicalizing both.
struct TwistedDistance {
  double rotation = 0.0;
  double diffeo = 0.0;
};
TwistedDistance twisted_distance(const TwistedClass& a, const TwistedClass& b, const DomainAtlas& atlas);

// Q o iota_r o g.
Immersion psi(const Rotation& q, DiffeoPtr g, double r, int resolution = 64);

struct PhiResult {
  TwistedClass cls;
  Circumcap cap;
  // Diagnostics of the sampled g_f.
  double roundtrip_error = 0.0;
  double min_jacobian_det = 0.0;
};
// f locally convex with hemispherical image: Q_f = rotation_to(c_f) and g_f the
// Euclidean Gauss map of pi o Q_f^{-1} o f.
PhiResult phi_convex(const Immersion& f, bool sample_diagnostics = true);
// f with hemispherical Gauss image: c_f = circumcenter of the dual's samples,
// g_f = tau o Q_f^{-1} o f.
PhiResult phi_hemi(const Immersion& f, bool sample_diagnostics = true);

// pi o Q^{-1} o f as a Euclidean immersion.
Immersion central_project(const Immersion& f, const Rotation& q);
// Q zeta_s Q^{-1} f.
Immersion zeta_conjugate(const Immersion& f, const Rotation& q, double s);

}  // namespace spherelab
