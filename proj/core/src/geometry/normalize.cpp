#include "surfcomp/geometry/normalize.hpp"

#include "surfcomp/util/error.hpp"

namespace surfcomp {

TriangleMesh transform_mesh(const TriangleMesh& mesh, const SimilarityTransform& t) {
  std::vector<Vec3> vertices;
  vertices.reserve(mesh.vertex_count());
  for (const Vec3& v : mesh.vertices()) vertices.push_back(t.apply(v));
  return TriangleMesh(std::move(vertices), mesh.triangles(), mesh.vertex_colors());
}

NormalizedMesh normalize_to_unit_cube(const TriangleMesh& mesh) {
  if (mesh.vertices().empty()) throw PreconditionError("cannot normalize an empty mesh");
  const Aabb box = mesh.bounds();
  const double extent = box.max_extent();
  if (!(extent > 0.0)) {
    throw DegenerateGeometryError("mesh has zero extent (all vertices coincide)");
  }
  SimilarityTransform t;
  t.scale = 1.0 / extent;
  t.translation = -t.scale * box.center();
  return {transform_mesh(mesh, t), t};
}

}  // namespace surfcomp
