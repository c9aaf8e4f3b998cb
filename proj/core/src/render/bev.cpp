#include "surfcomp/render/bev.hpp"

#include <cmath>
#include <limits>

#include "raster_core.hpp"
#include "surfcomp/util/error.hpp"

namespace surfcomp {

BevRender render_bev(const TriangleMesh& mesh, const BevOptions& options) {
  if (mesh.empty()) throw PreconditionError("cannot render BEV of an empty mesh");
  if (options.resolution < 1) throw PreconditionError("BEV resolution must be >= 1");
  if (!(options.margin >= 0.0)) throw PreconditionError("BEV margin must be >= 0");

  const Aabb box = mesh.bounds();
  const double ex = box.extent().x();
  const double ey = box.extent().y();
  const double side_core = std::max(ex, ey);
  if (!(side_core > 0.0)) throw DegenerateGeometryError("scene has zero XY extent");
  const double side = side_core * (1.0 + 2.0 * options.margin);

  BevRender out;
  out.base_z = options.base_z;
  out.frame.width = options.resolution;
  out.frame.height = options.resolution;
  out.frame.pixel_size = side / options.resolution;
  out.frame.origin_x = box.center().x() - 0.5 * side;
  out.frame.origin_y = box.center().y() + 0.5 * side;
  out.rgb = RgbImage(options.resolution, options.resolution, Rgb8{0, 0, 0});
  out.height = DepthImage(options.resolution, options.resolution, 0.0);
  std::vector<double> top(out.height.size(), -std::numeric_limits<double>::infinity());

  const Vec3 light_dir = options.light.direction.normalized();
  const Vec3 gray(0.7, 0.7, 0.7);
  const auto& verts = mesh.vertices();
  std::vector<Vec2> px(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) px[i] = out.frame.to_pixel(verts[i].x(), verts[i].y());

  for (const Triangle& tri : mesh.triangles()) {
    const Vec3 n = (verts[tri[1]] - verts[tri[0]]).cross(verts[tri[2]] - verts[tri[0]]);
    const double len = n.norm();
    if (!(len > 0.0)) continue;
    const double shade = detail::lambert(n / len, light_dir, options.light.intensity, options.light.ambient);
    detail::rasterize_triangle(
        px[tri[0]], px[tri[1]], px[tri[2]], out.frame.width, out.frame.height,
        [&](int u, int v, double w0, double w1, double w2) {
          const double z = w0 * verts[tri[0]].z() + w1 * verts[tri[1]].z() + w2 * verts[tri[2]].z();
          const std::size_t idx = static_cast<std::size_t>(v) * out.frame.width + u;
          if (!(z > top[idx])) return;
          top[idx] = z;
          const double hgt = z - options.base_z;
          out.height.at(u, v) = hgt > 0.0 ? hgt : 0.0;
          Vec3 c = mesh.has_colors() ? (w0 * mesh.vertex_colors()[tri[0]] + w1 * mesh.vertex_colors()[tri[1]] +
                                        w2 * mesh.vertex_colors()[tri[2]])
                                     : gray;
          c *= shade;
          Rgb8 rgb;
          for (int i = 0; i < 3; ++i) {
            rgb[i] = static_cast<std::uint8_t>(std::lround(std::clamp(c[i], 0.0, 1.0) * 255.0));
          }
          out.rgb.at(u, v) = rgb;
        });
  }
  return out;
}

}  // namespace surfcomp
