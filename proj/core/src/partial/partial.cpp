#include "surfcomp/partial/partial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "surfcomp/render/rasterizer.hpp"
#include "surfcomp/util/error.hpp"
#include "surfcomp/util/log.hpp"
#include "surfcomp/util/rng.hpp"

namespace surfcomp {

void ViewBundle::validate() const {
  intrinsics.validate();
  if (depth.width() != intrinsics.width || depth.height() != intrinsics.height) {
    throw PreconditionError("depth image size does not match the intrinsics");
  }
}

PointCloud backproject(const ViewBundle& view) {
  view.validate();
  std::vector<Vec3> points;
  for (int v = 0; v < view.depth.height(); ++v) {
    for (int u = 0; u < view.depth.width(); ++u) {
      const double z = view.depth.at(u, v);
      if (!(z > 0.0) || !std::isfinite(z)) continue;
      points.push_back(unproject_pixel(view.intrinsics, view.pose, u, v, z));
    }
  }
  if (points.empty()) logger()->warn("backproject: depth image has no valid pixels");
  return PointCloud(std::move(points));
}

PointCloud combine_views(std::span<const ViewBundle> views, std::size_t n_points, std::uint64_t seed) {
  if (views.empty()) throw PreconditionError("combine_views needs at least one view");
  if (n_points == 0) throw PreconditionError("n_points must be >= 1");
  if (views.size() > 3) logger()->warn("combining {} views; partial clouds normally use 1-3", views.size());

  std::vector<Vec3> pool;
  for (const ViewBundle& v : views) {
    const PointCloud c = backproject(v);
    pool.insert(pool.end(), c.points().begin(), c.points().end());
  }
  if (pool.empty()) throw DegenerateGeometryError("every view is empty; nothing to combine");

  Rng rng(seed);
  std::vector<Vec3> out;
  out.reserve(n_points);
  if (pool.size() >= n_points) {
    // Partial Fisher-Yates: the first n_points slots become the sample.
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n_points; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
      out.push_back(pool[idx[i]]);
    }
  } else {
    out = pool;
    while (out.size() < n_points) out.push_back(pool[static_cast<std::size_t>(rng.below(pool.size()))]);
  }
  return PointCloud(std::move(out));
}

std::vector<std::vector<std::size_t>> choose_view_subsets(std::size_t n_sets, std::size_t n_views,
                                                          std::uint64_t seed) {
  if (n_views == 0) throw PreconditionError("no views to choose from");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> sets;
  sets.reserve(n_sets);
  std::vector<std::size_t> idx(n_views);
  for (std::size_t s = 0; s < n_sets; ++s) {
    const std::size_t k = std::min<std::size_t>(1 + rng.below(3), n_views);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(n_views - i));
      std::swap(idx[i], idx[j]);
    }
    std::vector<std::size_t> chosen(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(chosen.begin(), chosen.end());
    sets.push_back(std::move(chosen));
  }
  return sets;
}

std::vector<PartialSet> make_partials_from_views(std::span<const ViewBundle> views, std::size_t n_sets,
                                                 std::size_t n_points, std::uint64_t seed) {
  const auto subsets = choose_view_subsets(n_sets, views.size(), derive_seed(seed, "view-subsets"));
  std::vector<PartialSet> out;
  out.reserve(n_sets);
  for (std::size_t s = 0; s < n_sets; ++s) {
    std::vector<ViewBundle> chosen;
    for (std::size_t id : subsets[s]) chosen.push_back(views[id]);
    const std::uint64_t set_seed = derive_seed(seed, s);
    out.push_back({combine_views(chosen, n_points, set_seed), subsets[s], set_seed});
  }
  return out;
}

std::vector<PartialSet> make_partials(const TriangleMesh& mesh, std::size_t n_sets, std::size_t views_per_model,
                                      std::size_t n_points, std::uint64_t seed, const CameraIntrinsics& intrinsics) {
  if (views_per_model < 3) throw PreconditionError("views_per_model must be >= 3");
  const auto poses = random_viewpoints(mesh.bounds(), views_per_model, derive_seed(seed, "viewpoints"));
  std::vector<ViewBundle> views;
  views.reserve(poses.size());
  for (const CameraPose& pose : poses) views.push_back({render(mesh, intrinsics, pose).depth, intrinsics, pose});
  return make_partials_from_views(views, n_sets, n_points, seed);
}

}  // namespace surfcomp
