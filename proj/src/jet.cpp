#include "spherelab/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace spherelab {
namespace {

struct Term {
  std::uint8_t a, b, out;
};

struct VarTables {
  int nvars = 0;
  int max_order = 0;
  std::vector<std::array<int, Jet::kMaxVars>> exps;
  std::vector<int> degree;
  std::vector<int> sizes;  // sizes[o] = monomials of degree <= o
  // derivative[idx * kMaxVars + i] = {target index, multiplicity} or {-1, 0}
  std::vector<std::pair<int, int>> derivative;
  std::vector<std::vector<Term>> products;  // per truncation order
};

VarTables build(int nvars) {
  VarTables t;
  t.nvars = nvars;
  while (true) {
    long count = 1;
    for (int k = 1; k <= nvars; ++k) count = count * (t.max_order + 1 + k) / k;
    if (count > Jet::kMaxCoeffs) break;
    ++t.max_order;
  }
  std::map<std::array<int, Jet::kMaxVars>, int> index;
  for (int d = 0; d <= t.max_order; ++d) {
    // Lexicographically descending exponent tuples of total degree d.
    std::array<int, Jet::kMaxVars> e{};
    auto emit = [&](auto&& self, int var, int remaining) -> void {
      if (var == nvars - 1) {
        e[var] = remaining;
        index[e] = static_cast<int>(t.exps.size());
        t.exps.push_back(e);
        t.degree.push_back(d);
        return;
      }
      for (int k = remaining; k >= 0; --k) {
        e[var] = k;
        self(self, var + 1, remaining - k);
      }
      e[var] = 0;
    };
    emit(emit, 0, d);
    t.sizes.push_back(static_cast<int>(t.exps.size()));
  }
  const int total = static_cast<int>(t.exps.size());
  t.derivative.assign(static_cast<std::size_t>(total) * Jet::kMaxVars, {-1, 0});
  for (int idx = 0; idx < total; ++idx) {
    for (int i = 0; i < nvars; ++i) {
      auto e = t.exps[idx];
      if (e[i] == 0) continue;
      const int mult = e[i];
      e[i] -= 1;
      t.derivative[idx * Jet::kMaxVars + i] = {index.at(e), mult};
    }
  }
  t.products.resize(t.max_order + 1);
  for (int o = 0; o <= t.max_order; ++o) {
    const int n = t.sizes[o];
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (t.degree[a] + t.degree[b] > o) continue;
        std::array<int, Jet::kMaxVars> e{};
        for (int i = 0; i < nvars; ++i) e[i] = t.exps[a][i] + t.exps[b][i];
        t.products[o].push_back({static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
                                 static_cast<std::uint8_t>(index.at(e))});
      }
    }
  }
  return t;
}

const VarTables& tables(int nvars) {
  static const std::array<VarTables, Jet::kMaxVars> all = {build(1), build(2), build(3)};
  if (nvars < 1 || nvars > Jet::kMaxVars) {
    throw std::invalid_argument("jet: unsupported variable count " + std::to_string(nvars));
  }
  return all[nvars - 1];
}

int combine_vars(const Jet& a, const Jet& b) {
  if (a.nvars() != 0 && b.nvars() != 0 && a.nvars() != b.nvars()) {
    throw std::invalid_argument("jet: mixing jets over different chart dimensions");
  }
  return std::max(a.nvars(), b.nvars());
}

}  // namespace

int jet_size(int nvars, int order) {
  if (nvars == 0) return 1;
  const auto& t = tables(nvars);
  if (order > t.max_order) {
    throw std::out_of_range("jet: order " + std::to_string(order) + " exceeds capacity for " +
                            std::to_string(nvars) + " variables");
  }
  return t.sizes[order];
}

int max_jet_order(int nvars) { return tables(nvars).max_order; }

Jet Jet::variable(double value, int index, int nvars, int order) {
  Jet j = constant(value, nvars, order);
  if (order >= 1) j.c_[1 + index] = 1.0;
  return j;
}

Jet Jet::constant(double value, int nvars, int order) {
  jet_size(nvars, order);  // validates capacity
  Jet j;
  j.c_[0] = value;
  j.nvars_ = static_cast<std::int8_t>(nvars);
  j.order_ = static_cast<std::int8_t>(order);
  return j;
}

int Jet::size() const { return is_constant() ? 1 : jet_size(nvars_, order_); }

double Jet::partial(int i) const {
  if (is_constant() || order_ < 1) return 0.0;
  return c_[1 + i];
}

double Jet::second(int i, int j) const {
  if (is_constant() || order_ < 2) return 0.0;
  const auto& t = tables(nvars_);
  // Locate x_i x_j among the degree-2 monomials.
  for (int idx = t.sizes[1]; idx < t.sizes[2]; ++idx) {
    std::array<int, kMaxVars> e{};
    e[i] += 1;
    e[j] += 1;
    if (t.exps[idx] == e) return (i == j ? 2.0 : 1.0) * c_[idx];
  }
  return 0.0;
}

Jet Jet::derivative(int i) const {
  if (is_constant()) return Jet(0.0);
  if (order_ < 1) throw std::logic_error("jet: derivative of an order-0 jet");
  const auto& t = tables(nvars_);
  Jet out;
  out.nvars_ = nvars_;
  out.order_ = static_cast<std::int8_t>(order_ - 1);
  const int n = t.sizes[order_];
  for (int idx = 1; idx < n; ++idx) {
    const auto [target, mult] = t.derivative[idx * kMaxVars + i];
    if (target >= 0) out.c_[target] += mult * c_[idx];
  }
  return out;
}

Jet Jet::truncated(int order) const {
  if (is_constant() || order >= order_) return *this;
  Jet out;
  out.nvars_ = nvars_;
  out.order_ = static_cast<std::int8_t>(order);
  const int n = jet_size(nvars_, order);
  std::copy_n(c_.begin(), n, out.c_.begin());
  return out;
}

Jet Jet::operator-() const {
  Jet out = *this;
  const int n = size();
  for (int k = 0; k < n; ++k) out.c_[k] = -out.c_[k];
  return out;
}

Jet& Jet::operator+=(const Jet& o) {
  const int old = size();
  const int nv = combine_vars(*this, o);
  const int ord = std::min<int>(order_, o.order_);
  nvars_ = static_cast<std::int8_t>(nv);
  order_ = static_cast<std::int8_t>(ord);
  const int n = size();
  const int on = std::min(n, o.size());
  for (int k = 0; k < on; ++k) c_[k] += o.c_[k];
  for (int k = n; k < old; ++k) c_[k] = 0.0;
  return *this;
}

Jet& Jet::operator-=(const Jet& o) { return *this += -o; }

Jet& Jet::operator*=(double s) {
  const int n = size();
  for (int k = 0; k < n; ++k) c_[k] *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.is_constant()) return b * a.c_[0];
  if (b.is_constant()) return a * b.c_[0];
  const int nv = combine_vars(a, b);
  const int ord = std::min<int>(a.order_, b.order_);
  Jet out;
  out.nvars_ = static_cast<std::int8_t>(nv);
  out.order_ = static_cast<std::int8_t>(ord);
  for (const Term& t : tables(nv).products[ord]) out.c_[t.out] += a.c_[t.a] * b.c_[t.b];
  return out;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet operator/(const Jet& a, const Jet& b) {
  if (b.is_constant()) return a * (1.0 / b.c_[0]);
  return a * reciprocal(b);
}

Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }

Jet compose_series(const Jet& x, const double* taylor) {
  if (x.is_constant()) return Jet(taylor[0]);
  Jet delta = x;
  delta.c_[0] = 0.0;
  Jet out = Jet::constant(taylor[x.order_], x.nvars_, x.order_);
  for (int k = x.order_ - 1; k >= 0; --k) {
    out = out * delta;
    out.c_[0] += taylor[k];
  }
  return out;
}

namespace {

template <class DerivFn>
Jet apply_series(const Jet& x, DerivFn&& nth_derivative) {
  std::array<double, 64> taylor{};
  const int order = x.is_constant() ? 0 : x.order();
  double factorial = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) factorial *= k;
    taylor[k] = nth_derivative(k) / factorial;
  }
  return compose_series(x, taylor.data());
}

}  // namespace

Jet sin(const Jet& x) {
  const double s = std::sin(x.value());
  const double c = std::cos(x.value());
  return apply_series(x, [&](int k) {
    switch (k % 4) {
      case 0: return s;
      case 1: return c;
      case 2: return -s;
      default: return -c;
    }
  });
}

Jet cos(const Jet& x) {
  const double s = std::sin(x.value());
  const double c = std::cos(x.value());
  return apply_series(x, [&](int k) {
    switch (k % 4) {
      case 0: return c;
      case 1: return -s;
      case 2: return -c;
      default: return s;
    }
  });
}

Jet tan(const Jet& x) { return sin(x) / cos(x); }

Jet sqrt(const Jet& x) {
  const double v = x.value();
  if (!(v > 0.0)) throw std::domain_error("jet: sqrt of non-positive value");
  return apply_series(x, [&](int k) {
    // d^k/dv^k v^(1/2) = (1/2)(1/2 - 1)...(1/2 - k + 1) v^(1/2 - k)
    double falling = 1.0;
    for (int j = 0; j < k; ++j) falling *= 0.5 - j;
    return falling * std::pow(v, 0.5 - k);
  });
}

Jet reciprocal(const Jet& x) {
  const double v = x.value();
  if (v == 0.0) throw std::domain_error("jet: reciprocal of zero");
  return apply_series(x, [&](int k) {
    double falling = 1.0;
    for (int j = 0; j < k; ++j) falling *= -1.0 - j;
    return falling * std::pow(v, -1.0 - k);
  });
}

}  // namespace spherelab
