#pragma once

#include <cstdint>
#include <vector>

#include "surfcomp/geometry/types.hpp"

namespace surfcomp {

struct SurfaceSample {
  PointCloud cloud;
  /// Source triangle of each point.
  std::vector<std::uint32_t> triangle_ids;
};

/// Area-weighted uniform sampling of n points on the mesh surface. Zero-area
/// triangles get zero weight. Deterministic in `seed`.
/// Throws DegenerateGeometryError when every triangle is degenerate.
PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);
SurfaceSample sample_surface_with_sources(const TriangleMesh& mesh, std::size_t n,
                                          std::uint64_t seed);

}  // namespace surfcomp
