#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace pcgeom {

/**
 * Exact 3-d kd-tree over a point set. Queries return (distance, index) pairs
 * sorted by distance with ties broken by ascending index; selection among
 * equidistant candidates in k-NN uses the same ordering, so results are
 * deterministic regardless of build order. Radius queries use the closed ball
 * (distance <= r).
 */
class KdTree {
 public:
  explicit KdTree(const std::vector<Eigen::Vector3d>& points);

  // k nearest neighbors of an arbitrary position (no exclusions).
  std::vector<std::pair<double, int>> knn(const Eigen::Vector3d& query, int k) const;

  // k nearest neighbors of the point at `index`, the point itself excluded.
  std::vector<std::pair<double, int>> knn_of_point(int index, int k) const;

  // All points with |x - query| <= r.
  std::vector<std::pair<double, int>> radius(const Eigen::Vector3d& query, double r) const;

  std::size_t size() const { return pts_.size(); }
  const Eigen::Vector3d& point(int i) const { return pts_[static_cast<std::size_t>(i)]; }

 private:
  struct Node {
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
    int axis = 0;
    double split = 0.0;
  };

  int build(int begin, int end);
  template <typename Visit>
  void walk(const Eigen::Vector3d& q, double& bound, int node, Visit&& visit) const;

  std::vector<Eigen::Vector3d> pts_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
  static constexpr int kLeafSize = 12;
};

}  // namespace pcgeom
