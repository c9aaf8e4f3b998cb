#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "surfcomp/geometry/types.hpp"

namespace surfcomp {

enum class Norm { kL1, kL2 };

struct Neighbor {
  std::size_t index = 0;  ///< position in the indexed cloud
  /// Squared Euclidean distance for kL2 queries, Manhattan distance for kL1.
  double key = std::numeric_limits<double>::infinity();
};

/// Squared Euclidean distance, evaluated in a fixed order so the index and any
/// exhaustive scan produce bit-identical values.
inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

inline double manhattan_distance(const Vec3& a, const Vec3& b) {
  return std::abs(a.x() - b.x()) + std::abs(a.y() - b.y()) + std::abs(a.z() - b.z());
}

/// Static k-d tree over a point cloud. Queries are exact under both the L2 and
/// the L1 metric; the per-axis split bound is a valid lower bound for either.
/// Ties resolve to the smallest original index. Safe for concurrent queries.
class NnIndex {
 public:
  /// Throws PreconditionError for an empty cloud.
  explicit NnIndex(const PointCloud& cloud);

  Neighbor nearest(const Vec3& query, Norm norm = Norm::kL2) const;

  /// Distance under `norm` (Euclidean length for kL2, not squared).
  double distance(const Vec3& query, Norm norm = Norm::kL2) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;  ///< -1 marks a leaf
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  template <Norm N>
  void search(std::int32_t node, const Vec3& q, Neighbor& best) const;

  std::vector<Vec3> points_;          ///< reordered copy
  std::vector<std::uint32_t> order_;  ///< reordered position -> original index
  std::vector<Node> nodes_;
};

}  // namespace surfcomp
