#include "surfcomp/geometry/types.hpp"

#include <string>

#include "surfcomp/util/error.hpp"

namespace surfcomp {

Aabb Aabb::of(std::span<const Vec3> points) {
  if (points.empty()) throw PreconditionError("bounding box of an empty point set");
  Aabb box{points.front(), points.front()};
  for (const Vec3& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                           std::vector<Vec3> vertex_colors)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      colors_(std::move(vertex_colors)) {
  if (!colors_.empty() && colors_.size() != vertices_.size()) {
    throw PreconditionError("vertex color count " + std::to_string(colors_.size()) +
                            " does not match vertex count " +
                            std::to_string(vertices_.size()));
  }
  if (!triangles_.empty() && vertices_.size() < 3) {
    throw PreconditionError("a mesh with triangles needs at least 3 vertices");
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!vertices_[i].allFinite()) {
      throw PreconditionError("vertex " + std::to_string(i) + " is not finite");
    }
  }
  const auto n = static_cast<std::uint32_t>(vertices_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const Triangle& tri = triangles_[t];
    if (tri[0] >= n || tri[1] >= n || tri[2] >= n) {
      throw PreconditionError("triangle " + std::to_string(t) + " indexes past vertex count");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw PreconditionError("triangle " + std::to_string(t) + " repeats a vertex");
    }
  }
}

double TriangleMesh::triangle_area(std::size_t t) const {
  const Triangle& tri = triangles_[t];
  return surfcomp::triangle_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double TriangleMesh::surface_area() const {
  double total = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) total += triangle_area(t);
  return total;
}

Aabb TriangleMesh::bounds() const { return Aabb::of(vertices_); }

std::vector<std::size_t> TriangleMesh::degenerate_triangles() const {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    if (!(triangle_area(t) > 0.0)) out.push_back(t);
  }
  return out;
}

PointCloud::PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw PreconditionError("point " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace surfcomp
