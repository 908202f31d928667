#include "pcgeom/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace pcgeom {

KdTree::KdTree(const std::vector<Eigen::Vector3d>& points) : pts_(points) {
  order_.resize(pts_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  nodes_.reserve(pts_.size() / kLeafSize * 2 + 4);
  if (!pts_.empty()) root_ = build(0, static_cast<int>(pts_.size()));
}

int KdTree::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = pts_[static_cast<std::size_t>(order_[static_cast<std::size_t>(begin)])];
  Eigen::Vector3d hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    const auto& p = pts_[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])];
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Eigen::Vector3d extent = hi - lo;
  int axis = 0;
  if (extent.y() > extent.x()) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;

  int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     double ca = pts_[static_cast<std::size_t>(a)][axis];
                     double cb = pts_[static_cast<std::size_t>(b)][axis];
                     if (ca != cb) return ca < cb;
                     return a < b;
                   });

  nodes_[static_cast<std::size_t>(id)].axis = axis;
  nodes_[static_cast<std::size_t>(id)].split =
      pts_[static_cast<std::size_t>(order_[static_cast<std::size_t>(mid)])][axis];
  int left = build(begin, mid);
  int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

namespace {
// Lexicographic (distance^2, index) ordering: the unique deterministic rank.
using Cand = std::pair<double, int>;
}  // namespace

template <typename Visit>
void KdTree::walk(const Eigen::Vector3d& q, double& bound, int node_id, Visit&& visit) const {
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) visit(order_[static_cast<std::size_t>(i)]);
    return;
  }
  double dx = q[node.axis] - node.split;
  int near = (dx <= 0.0) ? node.left : node.right;
  int far = (dx <= 0.0) ? node.right : node.left;
  walk(q, bound, near, visit);
  if (dx * dx <= bound) walk(q, bound, far, visit);
}

std::vector<Cand> KdTree::knn(const Eigen::Vector3d& query, int k) const {
  std::vector<Cand> out;
  if (k <= 0 || root_ < 0) return out;
  std::priority_queue<Cand> heap;  // max-heap on (dist^2, index)
  double bound = std::numeric_limits<double>::infinity();
  walk(query, bound, root_, [&](int idx) {
    double d2 = (pts_[static_cast<std::size_t>(idx)] - query).squaredNorm();
    Cand c{d2, idx};
    if (static_cast<int>(heap.size()) < k) {
      heap.push(c);
      if (static_cast<int>(heap.size()) == k) bound = heap.top().first;
    } else if (c < heap.top()) {
      heap.pop();
      heap.push(c);
      bound = heap.top().first;
    }
  });
  out.resize(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
  for (auto& c : out) c.first = std::sqrt(c.first);
  return out;
}

std::vector<Cand> KdTree::knn_of_point(int index, int k) const {
  if (index < 0 || static_cast<std::size_t>(index) >= pts_.size())
    throw std::out_of_range("KdTree::knn_of_point: index out of range");
  auto result = knn(pts_[static_cast<std::size_t>(index)], k + 1);
  for (std::size_t i = 0; i < result.size(); ++i) {
    if (result[i].second == index) {
      result.erase(result.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (static_cast<int>(result.size()) > k) result.resize(static_cast<std::size_t>(k));
  return result;
}

std::vector<Cand> KdTree::radius(const Eigen::Vector3d& query, double r) const {
  std::vector<Cand> out;
  if (root_ < 0 || r < 0.0) return out;
  double bound = r * r;
  walk(query, bound, root_, [&](int idx) {
    double d2 = (pts_[static_cast<std::size_t>(idx)] - query).squaredNorm();
    if (d2 <= r * r) out.emplace_back(d2, idx);
  });
  std::sort(out.begin(), out.end());
  for (auto& c : out) c.first = std::sqrt(c.first);
  return out;
}

}  // namespace pcgeom
