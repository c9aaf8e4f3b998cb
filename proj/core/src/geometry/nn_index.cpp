#include "surfcomp/geometry/nn_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "surfcomp/util/error.hpp"

namespace surfcomp {

namespace {
constexpr std::uint32_t kLeafSize = 8;

template <Norm N>
double metric(const Vec3& a, const Vec3& b) {
  if constexpr (N == Norm::kL2) {
    return squared_distance(a, b);
  } else {
    return manhattan_distance(a, b);
  }
}

/// Lower bound on the metric contributed by a per-axis gap.
template <Norm N>
double axis_bound(double gap) {
  if constexpr (N == Norm::kL2) {
    return gap * gap;
  } else {
    return std::abs(gap);
  }
}
}  // namespace

NnIndex::NnIndex(const PointCloud& cloud) {
  if (cloud.empty()) throw PreconditionError("cannot index an empty point cloud");
  points_ = cloud.points();
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t NnIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[begin];
  Vec3 hi = points_[begin];
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[i]);
    hi = hi.cwiseMax(points_[i]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  // Partition a permutation of [begin, end) around the median along `axis`,
  // then apply it to both the points and the index map.
  std::vector<std::uint32_t> perm(end - begin);
  std::iota(perm.begin(), perm.end(), begin);
  const std::uint32_t mid = (end - begin) / 2;
  std::nth_element(perm.begin(), perm.begin() + mid, perm.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis] ||
                            (points_[a][axis] == points_[b][axis] && a < b);
                   });
  std::vector<Vec3> pts(perm.size());
  std::vector<std::uint32_t> ord(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    pts[k] = points_[perm[k]];
    ord[k] = order_[perm[k]];
  }
  std::copy(pts.begin(), pts.end(), points_.begin() + begin);
  std::copy(ord.begin(), ord.end(), order_.begin() + begin);

  const double split = points_[begin + mid][axis];
  const std::int32_t left = build(begin, begin + mid);
  const std::int32_t right = build(begin + mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

template <Norm N>
void NnIndex::search(std::int32_t id, const Vec3& q, Neighbor& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const double d = metric<N>(q, points_[i]);
      if (d < best.key || (d == best.key && order_[i] < best.index)) {
        best.key = d;
        best.index = order_[i];
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double gap = q[node.axis] - node.split;
  const std::int32_t near = gap < 0.0 ? node.left : node.right;
  const std::int32_t far = gap < 0.0 ? node.right : node.left;
  search<N>(near, q, best);
  // <= keeps equal-distance candidates reachable for the index tie-break.
  if (axis_bound<N>(gap) <= best.key) search<N>(far, q, best);
}

Neighbor NnIndex::nearest(const Vec3& query, Norm norm) const {
  Neighbor best;
  best.index = points_.size();
  if (norm == Norm::kL2) {
    search<Norm::kL2>(0, query, best);
  } else {
    search<Norm::kL1>(0, query, best);
  }
  return best;
}

double NnIndex::distance(const Vec3& query, Norm norm) const {
  const Neighbor n = nearest(query, norm);
  return norm == Norm::kL2 ? std::sqrt(n.key) : n.key;
}

}  // namespace surfcomp
