#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "surfcomp/geometry/types.hpp"
#include "surfcomp/render/camera.hpp"
#include "surfcomp/render/image.hpp"

namespace surfcomp {

struct ViewBundle {
  DepthImage depth;
  CameraIntrinsics intrinsics;
  CameraPose pose;

  /// Throws PreconditionError when depth and intrinsics disagree on size.
  void validate() const;
};

/// Back-projects every valid pixel: camera point
/// ((u + 0.5 - cx) z / fx, (v + 0.5 - cy) z / fy, z), mapped to world by the
/// pose. Invalid pixels (0 or non-finite) are skipped; an all-invalid image
/// yields an empty cloud and a warning.
PointCloud backproject(const ViewBundle& view);

/// Concatenates the back-projections of `views` and resamples to exactly
/// n_points: uniform subsample without replacement when there are more points,
/// otherwise every source point plus uniformly drawn duplicates.
/// More than 3 views is allowed but logged. Throws DegenerateGeometryError when
/// every view is empty.
PointCloud combine_views(std::span<const ViewBundle> views, std::size_t n_points, std::uint64_t seed);

/// Which views feed each partial cloud: per set, k uniform in {1, 2, 3}
/// (capped at n_views) distinct view indices, sorted.
std::vector<std::vector<std::size_t>> choose_view_subsets(std::size_t n_sets, std::size_t n_views,
                                                          std::uint64_t seed);

struct PartialSet {
  PointCloud cloud;
  std::vector<std::size_t> view_ids;
  std::uint64_t seed = 0;  ///< seed passed to combine_views
};

/// Builds n_sets partial clouds from already rendered views.
std::vector<PartialSet> make_partials_from_views(std::span<const ViewBundle> views, std::size_t n_sets,
                                                 std::size_t n_points, std::uint64_t seed);

/// Renders views_per_model random-mode depth views of `mesh` once, then builds
/// n_sets partial clouds of exactly n_points each. Requires views_per_model >= 3.
std::vector<PartialSet> make_partials(const TriangleMesh& mesh, std::size_t n_sets, std::size_t views_per_model,
                                      std::size_t n_points, std::uint64_t seed,
                                      const CameraIntrinsics& intrinsics = {});

}  // namespace surfcomp
