#pragma once

#include "surfcomp/geometry/types.hpp"

namespace surfcomp {

/// Uniform scale followed by translation: p' = scale * p + translation.
struct SimilarityTransform {
  double scale = 1.0;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * p + translation; }
  Vec3 inverse(const Vec3& p) const { return (p - translation) / scale; }
};

struct NormalizedMesh {
  TriangleMesh mesh;
  SimilarityTransform transform;
};

/// Centers the AABB at the origin and scales uniformly so the largest AABB
/// extent is 1. Throws DegenerateGeometryError for zero-extent meshes and
/// PreconditionError for empty ones.
NormalizedMesh normalize_to_unit_cube(const TriangleMesh& mesh);

TriangleMesh transform_mesh(const TriangleMesh& mesh, const SimilarityTransform& t);

}  // namespace surfcomp
