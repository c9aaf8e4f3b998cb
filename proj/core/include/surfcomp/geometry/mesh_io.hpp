#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "surfcomp/geometry/types.hpp"

namespace surfcomp {

struct MeshLoadReport {
  std::size_t polygons_read = 0;
  std::size_t triangles_after_fan = 0;
  /// Zero-area triangles kept in the mesh.
  std::vector<std::size_t> degenerate_triangles;
};

/// Loads an OBJ (v/f records, 1-based or negative indices, n-gons fanned) or
/// PLY file (ascii or binary_little_endian). Format chosen by extension.
///
/// Errors: IoError when the file cannot be opened, ParseError (with line or
/// byte offset) on malformed content, UnsupportedFormatError for features
/// outside that subset.
TriangleMesh load_mesh(const std::filesystem::path& path,
                       MeshLoadReport* report = nullptr);

enum class PlyEncoding { kBinaryLittleEndian, kAscii };

/// Writes .ply (binary little-endian float64 by default, lossless) or .obj.
/// Refuses meshes without triangles.
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path,
               PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian);

/// Point clouds are vertex-only PLY files.
void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                      PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian);
PointCloud load_point_cloud(const std::filesystem::path& path);

}  // namespace surfcomp
