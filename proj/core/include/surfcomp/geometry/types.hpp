#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace surfcomp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

using Triangle = std::array<std::uint32_t, 3>;

/// Axis-aligned bounding box.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  /// Bounds of a non-empty point set. Throws PreconditionError when empty.
  static Aabb of(std::span<const Vec3> points);

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  double max_extent() const { return extent().maxCoeff(); }
  /// Radius of the sphere through the box corners.
  double bounding_radius() const { return 0.5 * extent().norm(); }
};

/// Indexed triangle set, world frame (right-handed, Z up, meters), with
/// optional per-vertex RGB in [0,1]. Validated on construction and immutable
/// afterwards. A default-constructed mesh is empty.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  /// Throws PreconditionError if an index is out of range, a triangle repeats a
  /// vertex, colors are misaligned, or a coordinate is not finite.
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
               std::vector<Vec3> vertex_colors = {});

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Vec3>& vertex_colors() const { return colors_; }
  bool has_colors() const { return !colors_.empty(); }

  bool empty() const { return triangles_.empty(); }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  double triangle_area(std::size_t t) const;
  double surface_area() const;
  Aabb bounds() const;
  /// Indices of zero-area triangles.
  std::vector<std::size_t> degenerate_triangles() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Vec3> colors_;
};

/// N x 3 point set with finite coordinates.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> points);

  const std::vector<Vec3>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }

 private:
  std::vector<Vec3> points_;
};

/// Area of the triangle (a, b, c).
inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace surfcomp
