#pragma once

#include <iosfwd>
#include <vector>

#include "spherelab/immersion.hpp"

namespace spherelab {

// Principal data at one sample. kappas ascend; radii[i] in (0, pi) with
// cot(radii[i]) = kappas[i]; directions[i] = df(u_i) for an eigenbasis u_i that
// is orthonormal in the induced metric.
struct CurvatureSample {
  Sample x;
  AmbientVector point;
  AmbientVector gauss;
  std::vector<double> kappas;
  std::vector<double> radii;
  std::vector<AmbientVector> directions;
  int l_count = 0;
  double rank_margin = 0.0;
};

// Interval [mid - half_width, mid + half_width] of R mod pi.
struct CircleInterval {
  double mid = 0.0;
  double half_width = 0.0;

  double lo() const { return mid - half_width; }
  double hi() const { return mid + half_width; }
  double width() const { return 2.0 * half_width; }
  bool contains(double angle, double tol = 0.0) const;
};

// Signed representative of a mod pi in (-pi/2, pi/2].
double wrap_half_pi(double a);
// Representative of a mod pi in [0, pi).
double mod_pi(double a);
// Distance on R mod pi.
double circle_distance(double a, double b);
// Principal radius of a curvature: the angle in (0, pi) with cotangent kappa.
double radius_of(double kappa);

struct RadiiInterval {
  CircleInterval interval;
  // Set when the minimal cover is not unique or is at least pi/2 wide.
  bool non_unique = false;
};

// Unit normal from the Jacobian columns. Sphere: det[df, nu, f] has the sign
// `orientation`; Euclidean: det[df, nu] does.
AmbientVector gauss_from_frame(const Matrix& jac, const AmbientVector& point, int orientation,
                               Ambient ambient);
// Same convention on jets: f of order k gives nu of order k - 1. The domain
// jet supplies the parametrization's orientation.
JetVec gauss_jet(const JetVec& f, const JetVec& domain, DomainKind kind, Ambient ambient);

AmbientVector gauss_vector(const Immersion& f, const Sample& x);
// Works for both ambients (II = <nu, d^2 f>, generalized eigenproblem against I).
CurvatureSample shape_spectrum(const Immersion& f, const Sample& x);
// As shape_spectrum, but requires a Euclidean ambient.
CurvatureSample euclidean_shape_spectrum(const Immersion& f, const Sample& x);
// All atlas samples, in sample order. Throws the error of the lowest failing sample.
std::vector<CurvatureSample> spectrum(const Immersion& f);

RadiiInterval radii_interval(const std::vector<CurvatureSample>& samples);
RadiiInterval radii_interval(const Immersion& f);

struct HypothesisReport {
  RadiiInterval j;
  bool width_below_half_pi = false;
  bool contains_zero = false;
  bool contains_half_pi = false;
  bool locally_convex = false;
  bool disjoint_from_quarter_shift = false;  // J and J + pi/2 disjoint
  bool l_constant = false;
  int l_count = 0;
  double min_kappa = 0.0;
  double max_kappa = 0.0;
};
HypothesisReport classify(const std::vector<CurvatureSample>& samples);
HypothesisReport classify(const Immersion& f);
json to_json(const HypothesisReport& r);

// Gauss curvature of the induced metric (Brioschi formula on jets) and the
// extrinsic value 1 + kappa_1 kappa_2 for n = 2 spherical immersions.
struct GaussEquationCheck {
  double intrinsic = 0.0;
  double extrinsic = 0.0;
};
GaussEquationCheck gauss_equation_check(const Immersion& f, const Sample& x);

// Columns: sample, chart, params, kappa_i, rho_i, l_count.
void write_samples_csv(std::ostream& os, const std::vector<CurvatureSample>& samples);

}  // namespace spherelab
