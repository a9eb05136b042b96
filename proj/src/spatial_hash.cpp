#include "spherelab/spatial_hash.hpp"

#include <cmath>
#include <limits>

#include "spherelab/errors.hpp"

namespace spherelab {

SpatialHash::SpatialHash(std::vector<Eigen::VectorXd> points, double cell)
    : points_(std::move(points)), cell_(cell) {
  if (!(cell_ > 0.0) || !std::isfinite(cell_)) throw NumericError("spatial hash: cell size must be positive");
  cells_.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    cells_[key_of(cell_of(points_[i]))].push_back(static_cast<int>(i));
  }
}

std::vector<std::int64_t> SpatialHash::cell_of(const Eigen::VectorXd& p) const {
  std::vector<std::int64_t> c(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) c[i] = static_cast<std::int64_t>(std::floor(p[i] / cell_));
  return c;
}

std::uint64_t SpatialHash::key_of(const std::vector<std::int64_t>& c) const {
  static constexpr std::uint64_t kPrimes[] = {73856093ULL, 19349663ULL, 83492791ULL,
                                               2654435761ULL, 805306457ULL, 1610612741ULL};
  std::uint64_t k = 1469598103934665603ULL;
  for (std::size_t i = 0; i < c.size(); ++i) {
    k ^= static_cast<std::uint64_t>(c[i]) * kPrimes[i % 6];
    k *= 1099511628211ULL;
  }
  return k;
}

std::vector<int> SpatialHash::neighbors(const Eigen::VectorXd& p) const {
  std::vector<int> out;
  const std::vector<std::int64_t> base = cell_of(p);
  const std::size_t d = base.size();
  std::vector<std::int64_t> c(d);
  std::size_t combos = 1;
  for (std::size_t i = 0; i < d; ++i) combos *= 3;
  for (std::size_t m = 0; m < combos; ++m) {
    std::size_t r = m;
    for (std::size_t i = 0; i < d; ++i) {
      c[i] = base[i] + static_cast<std::int64_t>(r % 3) - 1;
      r /= 3;
    }
    const auto it = cells_.find(key_of(c));
    if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

int SpatialHash::nearest(const Eigen::VectorXd& p) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i : neighbors(p)) {
    const double d = (points_[i] - p).squaredNorm();
    if (d < best_d || (d == best_d && i < best)) {
      best_d = d;
      best = i;
    }
  }
  // Anything outside the block is at least one cell away.
  if (best >= 0 && best_d <= cell_ * cell_) return best;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = (points_[i] - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace spherelab
