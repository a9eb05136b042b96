#pragma once

// Scalar-generic kernels for the point transformations. They are written once
// and instantiated for double (point-level API) and Jet (differentiated
// immersion evaluation). No validation happens here; callers check poles and
// domains.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "spherelab/jet.hpp"

namespace spherelab::maps {

template <class S>
using Vec = std::vector<S>;

template <class S>
S dot(const Vec<S>& a, const Vec<S>& b) {
  S acc = a[0] * b[0];
  for (std::size_t i = 1; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

template <class S>
Vec<S> scaled(const Vec<S>& a, const S& s) {
  Vec<S> out(a);
  for (auto& x : out) x = x * s;
  return out;
}

template <class S>
Vec<S> lincomb(const S& a, const Vec<S>& x, const S& b, const Vec<S>& y) {
  Vec<S> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

template <class S>
Vec<S> normalized(const Vec<S>& a) {
  using std::sqrt;
  const S inv = S(1.0) / sqrt(dot(a, a));
  return scaled(a, inv);
}

template <class S>
Vec<S> apply(const Eigen::MatrixXd& m, const Vec<S>& v) {
  Vec<S> out(static_cast<std::size_t>(m.rows()), S(0.0));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) != 0.0) out[r] += v[c] * m(r, c);
    }
  }
  return out;
}

// p in S^n (n+1 coordinates) -> sin r p - cos r e_{n+2}.
template <class S>
Vec<S> iota(double r, const Vec<S>& p) {
  Vec<S> out(p.size() + 1);
  const double sr = std::sin(r);
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * sr;
  out.back() = S(-std::cos(r));
  return out;
}

// Like iota but with a variable radius.
template <class S>
Vec<S> iota_variable(const S& r, const Vec<S>& p) {
  using std::cos;
  using std::sin;
  Vec<S> out(p.size() + 1);
  const S sr = sin(r);
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * sr;
  out.back() = -cos(r);
  return out;
}

// Conjugated Moebius map in the frame where the contraction center is -e_last:
// the stereographic contraction x -> s x through the chart projecting from
// +e_last, written without the pole singularity.
template <class S>
Vec<S> moebius_at_south(double s, const Vec<S>& q) {
  const std::size_t last = q.size() - 1;
  const S w = -q[last];
  const double s2 = s * s;
  const S denom = (S(1.0) + w) + (S(1.0) - w) * s2;
  const S inv = S(1.0) / denom;
  Vec<S> out(q.size());
  for (std::size_t i = 0; i < last; ++i) out[i] = q[i] * (2.0 * s) * inv;
  out[last] = ((S(1.0) - w) * s2 - (S(1.0) + w)) * inv;
  return out;
}

// M_s = sigma_c^{-1}(s sigma_c(p)) with frame = rotation_to(c).
template <class S>
Vec<S> moebius(const Eigen::MatrixXd& frame, double s, const Vec<S>& p) {
  return maps::apply(frame, moebius_at_south(s, maps::apply(Eigen::MatrixXd(frame.transpose()), p)));
}

template <class S>
Vec<S> zeta(double s, const Vec<S>& q) {
  Vec<S> out(q);
  out.back() = q.back() * (1.0 - s);
  return normalized(out);
}

// tau = zeta_1 regarded as a map into S^n (last coordinate dropped).
template <class S>
Vec<S> tau(const Vec<S>& q) {
  Vec<S> out(q.begin(), q.end() - 1);
  return normalized(out);
}

// Central projection of the southern hemisphere onto R^{n+1} x {-1};
// returns the first n+1 coordinates.
template <class S>
Vec<S> central(const Vec<S>& q) {
  const S inv = S(-1.0) / q.back();
  Vec<S> out(q.begin(), q.end() - 1);
  for (auto& x : out) x = x * inv;
  return out;
}

template <class S>
Vec<S> central_inverse(const Vec<S>& x) {
  Vec<S> out(x);
  out.push_back(S(-1.0));
  return normalized(out);
}

}  // namespace spherelab::maps
