#include "surfcomp/render/rasterizer.hpp"

#include <cmath>
#include <limits>

#include "raster_core.hpp"
#include "surfcomp/util/error.hpp"

namespace surfcomp {

namespace {

constexpr double kNearPlane = 1e-6;

struct ClipVertex {
  Vec3 cam;
  Vec3 color;
};

Rgb8 to_rgb8(const Vec3& c) {
  Rgb8 out;
  for (int i = 0; i < 3; ++i) {
    out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(c[i], 0.0, 1.0) * 255.0));
  }
  return out;
}

/// Sutherland-Hodgman against z >= near. At most 4 output vertices.
int clip_near(const ClipVertex (&in)[3], ClipVertex (&out)[4]) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& a = in[i];
    const ClipVertex& b = in[(i + 1) % 3];
    const bool a_in = a.cam.z() >= kNearPlane;
    const bool b_in = b.cam.z() >= kNearPlane;
    if (a_in) out[n++] = a;
    if (a_in != b_in) {
      const double t = (kNearPlane - a.cam.z()) / (b.cam.z() - a.cam.z());
      ClipVertex x{a.cam + t * (b.cam - a.cam), a.color + t * (b.color - a.color)};
      x.cam.z() = kNearPlane;
      out[n++] = x;
    }
  }
  return n;
}

}  // namespace

RenderOutput render(const TriangleMesh& mesh, const CameraIntrinsics& k, const CameraPose& pose,
                    const DirectionalLight& light) {
  if (k.width < 1 || k.height < 1) throw PreconditionError("zero-area image requested");
  k.validate();
  if (mesh.empty()) throw PreconditionError("cannot render an empty mesh");

  const int w = k.width;
  const int h = k.height;
  RenderOutput out{RgbImage(w, h, Rgb8{0, 0, 0}), DepthImage(w, h, 0.0)};
  std::vector<double> zbuf(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());

  const Vec3 light_dir = light.direction.normalized();
  const Vec3 gray(0.7, 0.7, 0.7);
  const auto& verts = mesh.vertices();
  std::vector<Vec3> cam(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) cam[i] = pose.to_camera(verts[i]);

  for (const Triangle& tri : mesh.triangles()) {
    const Vec3 n = (verts[tri[1]] - verts[tri[0]]).cross(verts[tri[2]] - verts[tri[0]]);
    const double len = n.norm();
    if (!(len > 0.0)) continue;
    const double shade = detail::lambert(n / len, light_dir, light.intensity, light.ambient);

    ClipVertex in[3];
    for (int i = 0; i < 3; ++i) {
      in[i] = {cam[tri[i]], mesh.has_colors() ? mesh.vertex_colors()[tri[i]] : gray};
    }
    ClipVertex poly[4];
    const int count = clip_near(in, poly);
    if (count < 3) continue;

    Vec2 screen[4];
    double inv_z[4];
    for (int i = 0; i < count; ++i) {
      inv_z[i] = 1.0 / poly[i].cam.z();
      screen[i] = Vec2(k.fx * poly[i].cam.x() * inv_z[i] + k.cx, k.fy * poly[i].cam.y() * inv_z[i] + k.cy);
    }
    for (int f = 1; f + 1 < count; ++f) {
      const int ids[3] = {0, f, f + 1};
      detail::rasterize_triangle(
          screen[0], screen[f], screen[f + 1], w, h,
          [&](int u, int v, double w0, double w1, double w2) {
            const double wz[3] = {w0 * inv_z[ids[0]], w1 * inv_z[ids[1]], w2 * inv_z[ids[2]]};
            const double z = 1.0 / (wz[0] + wz[1] + wz[2]);
            const std::size_t idx = static_cast<std::size_t>(v) * w + u;
            if (!(z < zbuf[idx])) return;
            zbuf[idx] = z;
            out.depth.at(u, v) = z;
            const Vec3 color =
                z * (wz[0] * poly[ids[0]].color + wz[1] * poly[ids[1]].color + wz[2] * poly[ids[2]].color);
            out.rgb.at(u, v) = to_rgb8(shade * color);
          });
    }
  }
  return out;
}

}  // namespace surfcomp
