#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace spherelab {

// Truncated multivariate Taylor polynomial ("jet") in up to 3 chart variables.
//
// Coefficients are stored in graded order (all degree-0 terms, then degree-1,
// ...), so the first C(order + nvars, nvars) entries describe the jet and a
// lower-order truncation is a prefix of a higher-order one. A coefficient is
// the Taylor coefficient d^a f / a!, not the raw partial derivative.
//
// Constants carry nvars = 0 and an unbounded order; arithmetic between jets
// yields the smaller order and the larger variable count.
class Jet {
 public:
  static constexpr int kMaxVars = 3;
  static constexpr int kMaxCoeffs = 35;
  static constexpr int kUnbounded = 127;

  Jet() = default;
  Jet(double value) { c_[0] = value; }  // NOLINT: implicit promotion is the point

  static Jet variable(double value, int index, int nvars, int order);
  static Jet constant(double value, int nvars, int order);

  int order() const { return order_; }
  int nvars() const { return nvars_; }
  bool is_constant() const { return nvars_ == 0; }
  int size() const;

  double value() const { return c_[0]; }
  double coeff(int index) const { return c_[index]; }
  double& coeff(int index) { return c_[index]; }

  // First partial derivative d/dx_i at the expansion point.
  double partial(int i) const;
  // Second partial derivative d^2/dx_i dx_j at the expansion point.
  double second(int i, int j) const;

  // Exact derivative as a jet of one order less.
  Jet derivative(int i) const;
  Jet truncated(int order) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator*=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }

 private:
  // Evaluates sum_k taylor[k] * (x - x0)^k, with taylor.size() == order + 1.
  friend Jet compose_series(const Jet& x, const double* taylor);

  std::array<double, kMaxCoeffs> c_{};
  std::int8_t nvars_ = 0;
  std::int8_t order_ = kUnbounded;
};

Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet tan(const Jet& x);
Jet sqrt(const Jet& x);
Jet reciprocal(const Jet& x);

// Number of monomials of total degree <= order in nvars variables.
int jet_size(int nvars, int order);
// Largest order representable for a given variable count.
int max_jet_order(int nvars);

using JetVec = std::vector<Jet>;

}  // namespace spherelab
