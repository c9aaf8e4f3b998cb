#pragma once

#include "surfcomp/geometry/types.hpp"
#include "surfcomp/render/camera.hpp"
#include "surfcomp/render/image.hpp"

namespace surfcomp {

/// Single directional light plus ambient floor.
struct DirectionalLight {
  Vec3 direction = Vec3(-0.3, -0.4, -1.0);  ///< direction the light travels
  double intensity = 1.0;
  double ambient = 0.2;
};

struct RenderOutput {
  RgbImage rgb;
  DepthImage depth;
};

/// Perspective z-buffer rasterization. A pixel is covered when its center lies
/// inside the projected triangle (top-left fill rule). Depth is camera-frame Z
/// of the nearest surface, 0 where nothing is hit. Faces are double-sided and
/// flat-shaded: ambient + (1 - ambient) * intensity * |n . l| times the vertex
/// color (0.7 gray when the mesh has none). Background is black.
RenderOutput render(const TriangleMesh& mesh, const CameraIntrinsics& intrinsics,
                    const CameraPose& pose, const DirectionalLight& light = {});

}  // namespace surfcomp
