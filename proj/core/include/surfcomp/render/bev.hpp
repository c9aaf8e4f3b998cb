#pragma once

#include "surfcomp/geometry/types.hpp"
#include "surfcomp/render/image.hpp"
#include "surfcomp/render/rasterizer.hpp"

namespace surfcomp {

/// Axis-aligned world (x, y) <-> BEV pixel mapping. Column u grows with +X,
/// row v grows with -Y so north is up in the image.
struct BevFrame {
  double origin_x = 0;  ///< world x of the left image edge
  double origin_y = 0;  ///< world y of the top image edge
  double pixel_size = 1;
  int width = 0;
  int height = 0;

  Vec2 to_pixel(double x, double y) const {
    return {(x - origin_x) / pixel_size, (origin_y - y) / pixel_size};
  }
  Vec2 to_world(double u, double v) const {
    return {origin_x + u * pixel_size, origin_y - v * pixel_size};
  }
};

struct BevRender {
  RgbImage rgb;
  /// Height of the top surface above `base_z`; 0 where no surface lies above it.
  DepthImage height;
  BevFrame frame;
  double base_z = 0.0;
};

struct BevOptions {
  int resolution = 512;  ///< image width and height in pixels
  double margin = 0.05;  ///< fraction of the XY extent added on each side
  double base_z = 0.0;   ///< heights are stored relative to this plane
  DirectionalLight light{};
};

/// Orthographic top-down render along -Z over the square enclosing the XY AABB
/// expanded by the margin. Throws DegenerateGeometryError for zero XY extent.
BevRender render_bev(const TriangleMesh& mesh, const BevOptions& options = {});

}  // namespace surfcomp
