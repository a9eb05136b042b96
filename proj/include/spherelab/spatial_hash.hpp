#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace spherelab {

// Uniform grid over a point cloud in R^d. Cell keys are hashed, so a lookup may
// return points from colliding cells; callers always re-check distances.
class SpatialHash {
 public:
  SpatialHash(std::vector<Eigen::VectorXd> points, double cell);

  double cell() const { return cell_; }
  const std::vector<Eigen::VectorXd>& points() const { return points_; }

  // Indices stored in the 3^d block of cells around p.
  std::vector<int> neighbors(const Eigen::VectorXd& p) const;
  // Index of the stored point closest to p.
  int nearest(const Eigen::VectorXd& p) const;

 private:
  std::uint64_t key_of(const std::vector<std::int64_t>& c) const;
  std::vector<std::int64_t> cell_of(const Eigen::VectorXd& p) const;

  std::vector<Eigen::VectorXd> points_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

}  // namespace spherelab
