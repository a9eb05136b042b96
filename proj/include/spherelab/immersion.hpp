#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spherelab/jet.hpp"
#include "spherelab/spatial_hash.hpp"
#include "spherelab/sphere_core.hpp"

namespace spherelab {

using json = nlohmann::ordered_json;

// Domain N of an immersion: S^n (cube-face atlas) or the 2-torus (angle grid).
enum class DomainKind { Sphere, Torus };
// Target of an immersion: S^{n+1} in R^{n+2}, or E^{n+1}.
enum class Ambient { Sphere, Euclidean };
enum class DiffMode { Analytic, Numeric };

// Chart index plus chart parameters. For the torus there is one chart whose
// parameters are the two angles.
struct Sample {
  int chart = 0;
  Eigen::VectorXd params;
};

// Discretization of the domain. Sphere charts are the 2(n+1) faces of the cube
// [-1,1]^{n+1} under the equiangular map, sampled at cell centres; the torus is
// the grid 2 pi i / R in each angle. Sample lists are deterministic.
class DomainAtlas {
 public:
  static DomainAtlas sphere(int n, int resolution = 64);
  static DomainAtlas torus(int resolution = 64);

  DomainKind kind() const { return data_->kind; }
  int n() const { return data_->n; }
  int resolution() const { return data_->resolution; }
  int chart_count() const;
  // Dimension of the domain-point representation: n+1 for S^n, 2 for angles.
  int domain_dim() const { return kind() == DomainKind::Sphere ? n() + 1 : 2; }

  const std::vector<Sample>& samples() const { return data_->samples; }
  std::size_t size() const { return data_->samples.size(); }
  // Grid graph: in-chart axis neighbours plus nearest cross-chart links.
  const std::vector<std::vector<int>>& adjacency() const { return data_->adjacency; }
  double median_domain_spacing() const { return data_->median_spacing; }

  JetVec domain_jet(const Sample& x, int order) const;
  Eigen::VectorXd domain_point(const Sample& x) const;
  const Eigen::VectorXd& domain_point(std::size_t index) const { return data_->points[index]; }
  // Chart distance for the sphere, wrapped angle distance for the torus.
  double domain_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  // Chart parameters of a domain point (preferring the face it projects to).
  Sample locate(const Eigen::VectorXd& domain_point) const;

  // Breadth-first hop distance, capped: returns cap + 1 when farther.
  int hop_distance(int from, int to, int cap) const;

  bool same_as(const DomainAtlas& o) const { return data_ == o.data_; }

 private:
  struct Data {
    DomainKind kind;
    int n;
    int resolution;
    std::vector<Sample> samples;
    std::vector<Eigen::VectorXd> points;
    std::vector<std::vector<int>> adjacency;
    double median_spacing = 0.0;
  };
  explicit DomainAtlas(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  static std::shared_ptr<const Data> build(DomainKind kind, int n, int resolution);

  std::shared_ptr<const Data> data_;
};

// Orientation sign (+1 / -1) of the parametrization carried by a domain jet:
// sign det[d_1 p, ..., d_n p, p] on S^n, sign det of the angle Jacobian on the torus.
int domain_orientation(const JetVec& domain, DomainKind kind);

// Expression node of an immersion. eval receives the domain point as a jet in
// the chart variables and returns ambient coordinates; a node that differentiates
// its input (Gauss maps) returns a jet one order lower, and depth() counts how
// many such orders are consumed.
class ImmersionNode {
 public:
  virtual ~ImmersionNode() = default;
  virtual JetVec eval(const JetVec& domain, DomainKind kind) const = 0;
  virtual int depth() const = 0;
  virtual int output_dim() const = 0;
  virtual Ambient ambient() const = 0;
};

using NodePtr = std::shared_ptr<const ImmersionNode>;

// Element of Diff(N) acting on domain points (unit vectors of R^{n+1} or angle
// pairs). Built-ins are orientation preserving.
class DomainDiffeo {
 public:
  virtual ~DomainDiffeo() = default;
  virtual JetVec apply(const JetVec& domain, DomainKind kind) const = 0;
  virtual int depth() const { return 0; }
  virtual int orientation() const { return +1; }
  virtual std::string describe() const = 0;
  // Closed-form inverse when one exists.
  virtual std::shared_ptr<const DomainDiffeo> inverse() const { return nullptr; }

  Eigen::VectorXd operator()(const Eigen::VectorXd& domain_point, DomainKind kind) const;
};

using DiffeoPtr = std::shared_ptr<const DomainDiffeo>;

DiffeoPtr identity_diffeo();
// p -> P p on S^n for P in SO(n+1).
DiffeoPtr rotation_diffeo(const Rotation& p);
// North-south squeeze of S^n: stereographic dilation by lambda fixing +-e_{n+1}.
DiffeoPtr squeeze_diffeo(double lambda);
// (theta, phi) -> (theta + a, phi + b).
DiffeoPtr torus_shift(double a, double b);
// outer o inner.
DiffeoPtr compose(DiffeoPtr outer, DiffeoPtr inner);
// Diffeo realised by an expression node whose output is a domain point.
DiffeoPtr node_diffeo(NodePtr node, std::string label, int orientation = +1);

// Sampled copy of a diffeo with a spatial-hash inverse (nearest image sample,
// then Gauss-Newton on the chart parameters).
class SampledDiffeo {
 public:
  SampledDiffeo(DiffeoPtr map, DomainAtlas atlas);

  const std::vector<Eigen::VectorXd>& images() const { return images_; }
  const DiffeoPtr& map() const { return map_; }
  // Domain point x with map(x) = target.
  Eigen::VectorXd inverse(const Eigen::VectorXd& target) const;
  // Largest |inverse(map(x)) - x| over the samples.
  double max_roundtrip_error() const;
  // Smallest signed Jacobian determinant over samples, relative to the chart
  // orientation; positive for an orientation-preserving local diffeo.
  double min_jacobian_determinant() const;

 private:
  DiffeoPtr map_;
  DomainAtlas atlas_;
  std::vector<Eigen::VectorXd> images_;
  std::shared_ptr<const SpatialHash> hash_;
};

// Parametric hypersurface N^n -> S^{n+1} (or E^{n+1}).
class Immersion {
 public:
  Immersion(DomainAtlas atlas, NodePtr node, json provenance,
            DiffMode mode = DiffMode::Analytic);

  const DomainAtlas& atlas() const { return atlas_; }
  const NodePtr& node() const { return node_; }
  const json& provenance() const { return provenance_; }
  DiffMode diff_mode() const { return mode_; }
  Immersion with_diff_mode(DiffMode mode) const;

  int n() const { return atlas_.n(); }
  Ambient ambient() const { return node_->ambient(); }
  int ambient_dim() const { return node_->output_dim(); }
  int depth() const { return node_->depth(); }

  Eigen::VectorXd point(const Sample& x) const;
  Eigen::VectorXd point(std::size_t sample_index) const { return point(atlas_.samples()[sample_index]); }
  // Ambient coordinates as jets of the given order in the chart variables.
  JetVec jet(const Sample& x, int order) const;
  // Images of all atlas samples.
  std::vector<Eigen::VectorXd> points() const;

 private:
  DomainAtlas atlas_;
  NodePtr node_;
  json provenance_;
  DiffMode mode_;
};

// Columns are the partial derivatives of f in the chart variables.
// Analytic mode: exact jets. Numeric mode: central differences, h = 1e-5,
// one Richardson step.
Matrix jacobian(const Immersion& f, const Sample& x);
// hessian(f, x)[i * n + j] = d^2 f / dx_i dx_j.
std::vector<AmbientVector> hessian(const Immersion& f, const Sample& x);
// Smallest over largest singular value of the Jacobian.
double rank_margin(const Immersion& f, const Sample& x);
inline constexpr double kRankTolerance = 1e-7;
// Throws DegeneracyError naming the first sample whose rank margin < kRankTolerance.
void check_rank(const Immersion& f);

// Q o iota_r o g on S^n. Throws DomainError for r outside (0, pi).
Immersion family_round(int n, double r, const Rotation& q, DiffeoPtr g = identity_diffeo(),
                       int resolution = 64);
// (theta, phi) -> (cos a theta, sin a theta, cos b phi, sin b phi) / sqrt 2.
Immersion family_clifford(int a, int b, int resolution = 64);

// Built-in test functions h on S^n for radial graphs.
enum class RadialProfile { Quadric, Cubic };
// p -> sin(rho) p - cos(rho) e_{n+2} with rho = r0 + eps h(p).
Immersion family_radial_graph(int n, double r0, double eps, RadialProfile h = RadialProfile::Quadric,
                              int resolution = 64);
// Euclidean sphere p -> radius * p (the map j_r with radius tan r).
Immersion euclidean_sphere(int n, double radius, int resolution = 64);
// Flat patch (theta, phi) -> (theta, phi, 0) of E^3.
Immersion euclidean_plane(int resolution = 64);

Immersion precompose(const Immersion& f, DiffeoPtr g);
Immersion postcompose_rotation(const Immersion& f, const Rotation& q);

NodePtr rotate_node(NodePtr child, const Rotation& q);
NodePtr precompose_node(NodePtr child, DiffeoPtr g);

// "chart 3 (0.12, -0.5)" for diagnostics.
std::string describe_sample(const Sample& x);

std::string to_string(RadialProfile h);
RadialProfile radial_profile_from_string(const std::string& s);

}  // namespace spherelab
