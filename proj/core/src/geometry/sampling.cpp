#include "surfcomp/geometry/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "surfcomp/util/error.hpp"
#include "surfcomp/util/rng.hpp"

namespace surfcomp {

SurfaceSample sample_surface_with_sources(const TriangleMesh& mesh, std::size_t n,
                                          std::uint64_t seed) {
  if (n == 0) throw PreconditionError("sample count must be >= 1");

  std::vector<double> cumulative(mesh.triangle_count());
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    total += mesh.triangle_area(t);
    cumulative[t] = total;
  }
  if (!(total > 0.0)) {
    throw DegenerateGeometryError("every triangle is degenerate; nothing to sample");
  }

  Rng rng(seed);
  const auto& verts = mesh.vertices();
  std::vector<Vec3> points;
  std::vector<std::uint32_t> ids;
  points.reserve(n);
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = rng.uniform01() * total;
    // upper_bound never lands on a zero-area triangle: its cumulative value
    // repeats the previous one.
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) {
      // target rounded up to total; take the last triangle with positive area
      --it;
      while (it != cumulative.begin() && *it == *(it - 1)) --it;
    }
    const auto t = static_cast<std::size_t>(it - cumulative.begin());

    const double r1 = std::sqrt(rng.uniform01());
    const double r2 = rng.uniform01();
    const double wa = 1.0 - r1;
    const double wb = r1 * (1.0 - r2);
    const double wc = r1 * r2;
    const Triangle& tri = mesh.triangles()[t];
    points.push_back(wa * verts[tri[0]] + wb * verts[tri[1]] + wc * verts[tri[2]]);
    ids.push_back(static_cast<std::uint32_t>(t));
  }
  return {PointCloud(std::move(points)), std::move(ids)};
}

PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  return sample_surface_with_sources(mesh, n, seed).cloud;
}

}  // namespace surfcomp
