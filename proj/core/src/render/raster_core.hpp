#pragma once

#include <algorithm>
#include <cmath>

#include "surfcomp/geometry/types.hpp"

namespace surfcomp::detail {

/// Visits every pixel whose center (u + 0.5, v + 0.5) lies inside the screen
/// triangle, using a top-left style tie rule so a pixel center on an edge
/// shared by two triangles is claimed by exactly one of them.
/// `visit(u, v, w0, w1, w2)` receives barycentric weights of the original
/// vertex order.
template <typename Visit>
void rasterize_triangle(const Vec2& p0, const Vec2& p1, const Vec2& p2, int width, int height,
                        Visit&& visit) {
  const Vec2* pts[3] = {&p0, &p1, &p2};
  int order[3] = {0, 1, 2};

  auto edge = [](const Vec2& a, const Vec2& b, double px, double py) {
    return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
  };
  double area2 = edge(p0, p1, p2.x(), p2.y());
  if (!(area2 != 0.0) || !std::isfinite(area2)) return;
  if (area2 < 0.0) {
    std::swap(order[1], order[2]);
    area2 = -area2;
  }
  const Vec2& a = *pts[order[0]];
  const Vec2& b = *pts[order[1]];
  const Vec2& c = *pts[order[2]];

  auto owns = [](const Vec2& from, const Vec2& to) {
    const double dx = to.x() - from.x();
    const double dy = to.y() - from.y();
    return dy > 0.0 || (dy == 0.0 && dx < 0.0);
  };
  const bool own_bc = owns(b, c);
  const bool own_ca = owns(c, a);
  const bool own_ab = owns(a, b);

  const double min_x = std::min({a.x(), b.x(), c.x()});
  const double max_x = std::max({a.x(), b.x(), c.x()});
  const double min_y = std::min({a.y(), b.y(), c.y()});
  const double max_y = std::max({a.y(), b.y(), c.y()});
  const int u0 = static_cast<int>(std::max(0.0, std::ceil(min_x - 0.5)));
  const int v0 = static_cast<int>(std::max(0.0, std::ceil(min_y - 0.5)));
  const int u1 = static_cast<int>(std::min(width - 1.0, std::floor(max_x - 0.5)));
  const int v1 = static_cast<int>(std::min(height - 1.0, std::floor(max_y - 0.5)));

  for (int v = v0; v <= v1; ++v) {
    const double py = v + 0.5;
    for (int u = u0; u <= u1; ++u) {
      const double px = u + 0.5;
      const double e_bc = edge(b, c, px, py);  // weight of a
      const double e_ca = edge(c, a, px, py);  // weight of b
      const double e_ab = edge(a, b, px, py);  // weight of c
      if (e_bc < 0.0 || e_ca < 0.0 || e_ab < 0.0) continue;
      if ((e_bc == 0.0 && !own_bc) || (e_ca == 0.0 && !own_ca) || (e_ab == 0.0 && !own_ab)) {
        continue;
      }
      double w[3];
      w[order[0]] = e_bc / area2;
      w[order[1]] = e_ca / area2;
      w[order[2]] = e_ab / area2;
      visit(u, v, w[0], w[1], w[2]);
    }
  }
}

/// Lambert shade factor for a double-sided face with world normal `n`.
inline double lambert(const Vec3& n, const Vec3& light_dir, double intensity, double ambient) {
  const double ndotl = std::abs(n.dot(-light_dir));
  return std::min(1.0, ambient + (1.0 - ambient) * intensity * ndotl);
}

}  // namespace surfcomp::detail
