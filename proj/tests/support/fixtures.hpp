#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "surfcomp/geometry/types.hpp"
#include "surfcomp/providers/prompts.hpp"
#include "surfcomp/render/bev.hpp"

namespace surfcomp::testing {

/// Closed axis-aligned box, 8 vertices and 12 outward-facing triangles.
TriangleMesh make_box(const Vec3& lo, const Vec3& hi);

/// Flat n x n grid of quads at height z covering [lo, hi] in XY.
TriangleMesh make_ground(const Vec2& lo, const Vec2& hi, double z, int n = 1);

/// Mask whose label i + 1 covers the pixels with centers inside footprint i
/// (XY rectangles given as lo, hi).
LabelMask footprint_mask(const BevFrame& frame, const std::vector<std::pair<Vec2, Vec2>>& footprints);

TriangleMesh merge(const std::vector<TriangleMesh>& parts);

/// Uniform points in [-scale, scale]^3.
PointCloud random_cloud(std::size_t n, std::uint64_t seed, double scale = 0.5);

/// Random triangle soup with vertices in [-scale, scale]^3 (may be non-manifold).
TriangleMesh random_mesh(std::size_t triangles, std::uint64_t seed, double scale = 1.0);

/// Rigid transform of every point.
PointCloud transform(const PointCloud& cloud, const Mat3& rotation, const Vec3& translation);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace surfcomp::testing
