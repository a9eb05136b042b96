#pragma once

#include <string>
#include <vector>

#include "spherelab/immersion.hpp"

namespace spherelab {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  int find(int a);
  bool unite(int a, int b);
  std::size_t components() const { return components_; }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
  std::size_t components_;
};

// Discretized image: sample points plus the domain grid graph.
struct SampledHypersurface {
  std::vector<AmbientVector> points;
  const std::vector<std::vector<int>>* adjacency = nullptr;
  json source;
  // Median ambient length of the grid edges.
  double median_spacing = 0.0;
};
SampledHypersurface sample_hypersurface(const Immersion& f);

struct IntersectionPair {
  int a = 0, b = 0;         // seed samples
  Sample xa, xb;            // refined parameters
  double distance = 0.0;    // refined |f(xa) - f(xb)|
};

struct IntersectionReport {
  std::vector<std::vector<IntersectionPair>> clusters;
  std::vector<IntersectionPair> suspects;
  int m = 1;
  bool embedded = true;
  double eps = 0.0;
  int delta = 0;
  double median_spacing = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr double kIntersectionEps = 1e-3;
inline constexpr int kIntersectionDelta = 5;

// Candidate pairs from a spatial hash (cell 2x median spacing) at more than
// delta grid hops, refined by damped Gauss-Newton on |f(x) - f(y)|^2 and
// accepted below eps; clusters by union-find.
IntersectionReport self_intersections(const Immersion& f, double eps = kIntersectionEps,
                                      int delta = kIntersectionDelta);
// self_intersections of dual(f).
IntersectionReport dual_embedding_check(const Immersion& f, double eps = kIntersectionEps,
                                        int delta = kIntersectionDelta);
json to_json(const IntersectionReport& r);

struct DeckGroup {
  std::string name;
  std::vector<Rotation> elements;
  int order() const { return static_cast<int>(elements.size()); }
};

struct FreeActionReport {
  bool free = true;
  // Smallest singular value of g - I over non-identity g.
  double min_singular = 0.0;
  // Smallest |g x - x| over a dense random sample of the sphere.
  double min_displacement = 0.0;
};
FreeActionReport validate_free_action(const std::vector<Rotation>& elements, int samples = 20000,
                                      unsigned seed = 1);

// Checks identity, closure (1e-10) and free action; throws DomainError otherwise.
DeckGroup make_deck_group(std::string name, std::vector<Rotation> elements);
DeckGroup deck_trivial(int n);
// {I, -I} on S^{n+1}; needs n + 2 even.
DeckGroup deck_antipodal(int n);
// Cyclic group generated by the rotation with angles 2 pi/p and 2 pi q/p on R^4.
DeckGroup deck_lens(int p, int q);
// "trivial", "antipodal", "lens:p,q".
DeckGroup deck_from_string(const std::string& spec, int n);

struct PreimageReport {
  int k = 0;
  int gc_order = 0;
  int gamma_order = 0;
  bool identity_holds = false;
  double eps_link = 0.0;
};
// Components of the union of g f(N) over g in the group, and the stabilizer of
// one component. Throws ResolutionError when k changes under eps_link +-20%.
PreimageReport preimage_components(const Immersion& f, const DeckGroup& gamma, double eps_link = 0.0);
json to_json(const PreimageReport& r);

struct MultiplicityReport {
  bool skipped = false;
  std::string reason;
  int m_identified = 0;
  int symmetry_order = 0;
  int m = 0;
  int gamma_order = 0;
  bool bound_holds = false;
};
MultiplicityReport multiplicity_bound_check(const Immersion& f, const DeckGroup& gamma);
json to_json(const MultiplicityReport& r);

struct FactorReport {
  int symmetry_order = 1;
  json factor;
};
// Domain symmetries f o gamma = f among the lattice shifts of a wrapped family.
FactorReport irreducible_factor(const Immersion& f);

}  // namespace spherelab
