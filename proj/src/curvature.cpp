#include "spherelab/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "spherelab/errors.hpp"
#include "spherelab/parallel.hpp"

namespace spherelab {
namespace {

constexpr double kPi = std::numbers::pi;

Jet det2(const Jet& a, const Jet& b, const Jet& c, const Jet& d) { return a * d - b * c; }

// Determinant of a k x k jet matrix given as rows of pointers, k <= 4.
Jet jet_det(const std::vector<std::vector<const Jet*>>& m) {
  const std::size_t k = m.size();
  if (k == 1) return *m[0][0];
  if (k == 2) return det2(*m[0][0], *m[0][1], *m[1][0], *m[1][1]);
  if (k == 3) {
    return *m[0][0] * det2(*m[1][1], *m[1][2], *m[2][1], *m[2][2]) -
           *m[0][1] * det2(*m[1][0], *m[1][2], *m[2][0], *m[2][2]) +
           *m[0][2] * det2(*m[1][0], *m[1][1], *m[2][0], *m[2][1]);
  }
  Jet acc(0.0);
  bool first = true;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::vector<const Jet*>> minor;
    minor.reserve(k - 1);
    for (std::size_t r = 1; r < k; ++r) {
      std::vector<const Jet*> row;
      row.reserve(k - 1);
      for (std::size_t cc = 0; cc < k; ++cc)
        if (cc != c) row.push_back(m[r][cc]);
      minor.push_back(std::move(row));
    }
    const Jet term = *m[0][c] * jet_det(minor);
    if (first) {
      acc = (c % 2 == 0) ? term : -term;
      first = false;
    } else if (c % 2 == 0) {
      acc += term;
    } else {
      acc -= term;
    }
  }
  return acc;
}

int sample_orientation(const Immersion& f, const Sample& x) {
  return domain_orientation(f.atlas().domain_jet(x, 1), f.atlas().kind());
}

std::string at(const Sample& x) { return " at " + describe_sample(x); }

}  // namespace

double wrap_half_pi(double a) {
  double r = std::fmod(a, kPi);
  if (r > kPi / 2) r -= kPi;
  if (r <= -kPi / 2) r += kPi;
  return r;
}

double mod_pi(double a) {
  double r = std::fmod(a, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r -= kPi;
  return r;
}

double circle_distance(double a, double b) { return std::abs(wrap_half_pi(a - b)); }

double radius_of(double kappa) { return std::atan2(1.0, kappa); }

bool CircleInterval::contains(double angle, double tol) const {
  return circle_distance(angle, mid) <= half_width + tol;
}

AmbientVector gauss_from_frame(const Matrix& jac, const AmbientVector& point, int orientation,
                               Ambient ambient) {
  const Eigen::Index dim = jac.rows();
  const Eigen::Index n = jac.cols();
  Matrix m(dim, dim);
  m.leftCols(n) = jac;
  if (ambient == Ambient::Sphere) m.col(n + 1) = point;
  AmbientVector w(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    m.col(n).setZero();
    m(i, n) = 1.0;
    w[i] = m.determinant();
  }
  const double len = w.norm();
  if (!(len > 0.0)) throw DegeneracyError("Gauss vector: tangent frame is degenerate");
  return (orientation / len) * w;
}

JetVec gauss_jet(const JetVec& f, const JetVec& domain, DomainKind kind, Ambient ambient) {
  const int n = f[0].nvars();
  const int order = f[0].order();
  if (order < 1) throw NumericError("gauss_jet: needs a jet of order at least 1");
  const std::size_t dim = f.size();
  // Columns of the frame: n derivative columns, then the point (sphere only).
  std::vector<JetVec> cols(static_cast<std::size_t>(n), JetVec(dim));
  for (int c = 0; c < n; ++c)
    for (std::size_t r = 0; r < dim; ++r) cols[c][r] = f[r].derivative(c);
  JetVec base;
  if (ambient == Ambient::Sphere) {
    base.resize(dim);
    for (std::size_t r = 0; r < dim; ++r) base[r] = f[r].truncated(order - 1);
  }

  JetVec w(dim);
  Jet norm2(0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    // Cofactor of e_i in column n: delete row i and that column.
    std::vector<std::vector<const Jet*>> minor;
    minor.reserve(dim - 1);
    for (std::size_t r = 0; r < dim; ++r) {
      if (r == i) continue;
      std::vector<const Jet*> row;
      row.reserve(dim - 1);
      for (int c = 0; c < n; ++c) row.push_back(&cols[c][r]);
      if (ambient == Ambient::Sphere) row.push_back(&base[r]);
      minor.push_back(std::move(row));
    }
    w[i] = jet_det(minor);
    if ((i + static_cast<std::size_t>(n)) % 2 == 1) w[i] = -w[i];
    norm2 += w[i] * w[i];
  }
  if (!(norm2.value() > 0.0)) throw DegeneracyError("Gauss map: tangent frame is degenerate");
  const Jet scale = reciprocal(sqrt(norm2)) * static_cast<double>(domain_orientation(domain, kind));
  for (auto& c : w) c *= scale;
  return w;
}

AmbientVector gauss_vector(const Immersion& f, const Sample& x) {
  const Matrix jac = jacobian(f, x);
  const Eigen::JacobiSVD<Matrix> svd(jac);
  const auto& s = svd.singularValues();
  if (!(s[s.size() - 1] >= kRankTolerance * s[0])) throw DegeneracyError("rank check failed" + at(x));
  return gauss_from_frame(jac, f.point(x), sample_orientation(f, x), f.ambient());
}

CurvatureSample shape_spectrum(const Immersion& f, const Sample& x) {
  const int n = static_cast<int>(x.params.size());
  Matrix jac;
  std::vector<AmbientVector> hess;
  AmbientVector point;
  if (f.diff_mode() == DiffMode::Analytic) {
    const JetVec j = f.jet(x, 2);
    const auto dim = static_cast<Eigen::Index>(j.size());
    jac.resize(dim, n);
    point.resize(dim);
    hess.assign(static_cast<std::size_t>(n * n), AmbientVector(dim));
    for (Eigen::Index k = 0; k < dim; ++k) {
      point[k] = j[k].value();
      for (int a = 0; a < n; ++a) {
        jac(k, a) = j[k].partial(a);
        for (int b = 0; b < n; ++b) hess[a * n + b][k] = j[k].second(a, b);
      }
    }
  } else {
    jac = jacobian(f, x);
    hess = hessian(f, x);
    point = f.point(x);
  }

  CurvatureSample out;
  out.x = x;
  out.point = point;
  const Eigen::JacobiSVD<Matrix> svd(jac);
  const auto& sv = svd.singularValues();
  out.rank_margin = sv[0] > 0.0 ? sv[sv.size() - 1] / sv[0] : 0.0;
  if (!(out.rank_margin >= kRankTolerance)) {
    std::ostringstream os;
    os << "rank check failed" << at(x) << ": singular-value ratio " << out.rank_margin;
    throw DegeneracyError(os.str());
  }
  out.gauss = gauss_from_frame(jac, point, sample_orientation(f, x), f.ambient());

  const Matrix first = jac.transpose() * jac;
  Matrix second(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) second(a, b) = out.gauss.dot(hess[a * n + b]);
  second = 0.5 * (second + second.transpose()).eval();

  Eigen::VectorXd kappa(n);
  Matrix coeffs(n, n);  // columns: eigenvectors in chart coordinates, I-orthonormal
  if (n == 2) {
    // Reduce by the Cholesky factor of I, then the symmetric 2x2 closed form;
    // no square root of a difference, so umbilics keep full precision.
    const double l00 = std::sqrt(first(0, 0));
    const double l10 = first(1, 0) / l00;
    const double l11 = std::sqrt(first(1, 1) - l10 * l10);
    if (!(l11 > 0.0)) throw NumericError("first fundamental form not positive definite" + at(x));
    Eigen::Matrix2d linv;
    linv << 1.0 / l00, 0.0, -l10 / (l00 * l11), 1.0 / l11;
    const Eigen::Matrix2d red = linv * second * linv.transpose();
    const double a = red(0, 0), c = red(1, 1), b = 0.5 * (red(0, 1) + red(1, 0));
    const double half_mean = 0.5 * (a + c);
    const double radius = std::hypot(0.5 * (a - c), b);
    kappa << half_mean - radius, half_mean + radius;
    const double theta = 0.5 * std::atan2(2.0 * b, a - c);
    Eigen::Matrix2d vecs;
    vecs << -std::sin(theta), std::cos(theta), std::cos(theta), std::sin(theta);
    coeffs = linv.transpose() * vecs;
  } else {
    const Eigen::LLT<Matrix> llt(first);
    if (llt.info() != Eigen::Success) {
      throw NumericError("first fundamental form not positive definite" + at(x));
    }
    const Matrix lower = llt.matrixL();
    const Matrix linv = lower.inverse();
    const Matrix reduced = linv * second * linv.transpose();
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (reduced + reduced.transpose()));
    if (eig.info() != Eigen::Success) {
      std::ostringstream os;
      os << "eigen-solver failure" << at(x) << " (condition of I: "
         << first.jacobiSvd().singularValues()[0] / first.jacobiSvd().singularValues()[n - 1] << ")";
      throw NumericError(os.str());
    }
    kappa = eig.eigenvalues();
    coeffs = linv.transpose() * eig.eigenvectors();
  }

  for (int i = 0; i < n; ++i) {
    out.kappas.push_back(kappa[i]);
    out.radii.push_back(radius_of(kappa[i]));
    out.directions.push_back(jac * coeffs.col(i));
    if (kappa[i] > 0.0) ++out.l_count;
  }
  return out;
}

CurvatureSample euclidean_shape_spectrum(const Immersion& f, const Sample& x) {
  if (f.ambient() != Ambient::Euclidean) throw DomainError("euclidean_shape_spectrum: ambient is not Euclidean");
  return shape_spectrum(f, x);
}

std::vector<CurvatureSample> spectrum(const Immersion& f) {
  const auto& samples = f.atlas().samples();
  std::vector<std::optional<CurvatureSample>> out(samples.size());
  std::vector<std::exception_ptr> errors(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    try {
      out[i] = shape_spectrum(f, samples[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<CurvatureSample> result;
  result.reserve(samples.size());
  for (auto& s : out) result.push_back(std::move(*s));
  return result;
}

RadiiInterval radii_interval(const std::vector<CurvatureSample>& samples) {
  std::vector<double> radii;
  for (const auto& s : samples)
    for (double r : s.radii) radii.push_back(mod_pi(r));
  if (radii.empty()) throw DomainError("radii_interval: no samples");
  std::sort(radii.begin(), radii.end());
  const std::size_t m = radii.size();
  // gap[i] runs from radii[i] to radii[i+1] (the last one wraps through pi = 0).
  std::vector<double> gap(m);
  for (std::size_t i = 0; i + 1 < m; ++i) gap[i] = radii[i + 1] - radii[i];
  gap[m - 1] = radii[0] + kPi - radii[m - 1];
  const double largest = *std::max_element(gap.begin(), gap.end());
  constexpr double kTie = 1e-9;

  RadiiInterval best;
  bool have = false;
  bool best_wraps = true;
  int ties = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (gap[i] < largest - kTie) continue;
    ++ties;
    // The cover starts after gap i and ends at its start.
    const double start = radii[(i + 1) % m];
    const double width = kPi - gap[i];
    const double mid = mod_pi(start + width / 2.0);
    const bool wraps = (i != m - 1);  // only the wrap gap gives a cover inside [0, pi)
    const bool better = !have || (best_wraps && !wraps) || (best_wraps == wraps && mid < best.interval.mid);
    if (better) {
      best.interval = {mid, width / 2.0};
      best_wraps = wraps;
      have = true;
    }
  }
  best.non_unique = ties > 1 || best.interval.width() >= kPi / 2 - kTie;
  return best;
}

RadiiInterval radii_interval(const Immersion& f) { return radii_interval(spectrum(f)); }

HypothesisReport classify(const std::vector<CurvatureSample>& samples) {
  HypothesisReport r;
  r.j = radii_interval(samples);
  const CircleInterval& j = r.j.interval;
  r.width_below_half_pi = j.width() < kPi / 2;
  r.contains_zero = j.contains(0.0);
  r.contains_half_pi = j.contains(kPi / 2);
  r.disjoint_from_quarter_shift = r.width_below_half_pi;
  r.min_kappa = samples.front().kappas.front();
  r.max_kappa = samples.front().kappas.back();
  r.l_count = samples.front().l_count;
  r.l_constant = true;
  for (const auto& s : samples) {
    r.min_kappa = std::min(r.min_kappa, s.kappas.front());
    r.max_kappa = std::max(r.max_kappa, s.kappas.back());
    if (s.l_count != r.l_count) r.l_constant = false;
  }
  r.locally_convex = r.min_kappa > 0.0;
  return r;
}

HypothesisReport classify(const Immersion& f) { return classify(spectrum(f)); }

json to_json(const HypothesisReport& r) {
  return {{"J_mid", r.j.interval.mid},
          {"J_half_width", r.j.interval.half_width},
          {"J_lo", r.j.interval.lo()},
          {"J_hi", r.j.interval.hi()},
          {"J_non_unique", r.j.non_unique},
          {"width_below_half_pi", r.width_below_half_pi},
          {"contains_zero", r.contains_zero},
          {"contains_half_pi", r.contains_half_pi},
          {"locally_convex", r.locally_convex},
          {"disjoint_from_quarter_shift", r.disjoint_from_quarter_shift},
          {"l_constant", r.l_constant},
          {"l_count", r.l_count},
          {"min_k", r.min_kappa},
          {"max_k", r.max_kappa}};
}

GaussEquationCheck gauss_equation_check(const Immersion& f, const Sample& x) {
  if (f.n() != 2 || f.ambient() != Ambient::Sphere) {
    throw DomainError("gauss_equation_check: needs n = 2 and spherical ambient");
  }
  const JetVec j = f.jet(x, 3);
  JetVec fu(j.size()), fv(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    fu[k] = j[k].derivative(0);
    fv[k] = j[k].derivative(1);
  }
  Jet e(0.0), fm(0.0), g(0.0);
  for (std::size_t k = 0; k < j.size(); ++k) {
    e += fu[k] * fu[k];
    fm += fu[k] * fv[k];
    g += fv[k] * fv[k];
  }
  const double ev = e.value(), fv0 = fm.value(), gv = g.value();
  const double e_u = e.partial(0), e_v = e.partial(1);
  const double f_u = fm.partial(0), f_v = fm.partial(1);
  const double g_u = g.partial(0), g_v = g.partial(1);
  const double e_vv = e.second(1, 1), f_uv = fm.second(0, 1), g_uu = g.second(0, 0);
  Eigen::Matrix3d a, b;
  a << -0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v,
      f_v - 0.5 * g_u, ev, fv0,
      0.5 * g_v, fv0, gv;
  b << 0.0, 0.5 * e_v, 0.5 * g_u,
      0.5 * e_v, ev, fv0,
      0.5 * g_u, fv0, gv;
  const double det_i = ev * gv - fv0 * fv0;
  GaussEquationCheck out;
  out.intrinsic = (a.determinant() - b.determinant()) / (det_i * det_i);
  const CurvatureSample s = shape_spectrum(f, x);
  out.extrinsic = 1.0 + s.kappas[0] * s.kappas[1];
  return out;
}

void write_samples_csv(std::ostream& os, const std::vector<CurvatureSample>& samples) {
  if (samples.empty()) return;
  const std::size_t n = samples.front().kappas.size();
  const auto np = samples.front().x.params.size();
  os << "sample,chart";
  for (Eigen::Index i = 0; i < np; ++i) os << ",x" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",kappa" << i + 1;
  for (std::size_t i = 0; i < n; ++i) os << ",rho" << i + 1;
  os << ",l_count\n";
  os.precision(17);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& c = samples[s];
    os << s << ',' << c.x.chart;
    for (Eigen::Index i = 0; i < c.x.params.size(); ++i) os << ',' << c.x.params[i];
    for (double k : c.kappas) os << ',' << k;
    for (double r : c.radii) os << ',' << r;
    os << ',' << c.l_count << '\n';
  }
}

}  // namespace spherelab
