#pragma once

#include <optional>

#include "surfcomp/geometry/nn_index.hpp"
#include "surfcomp/geometry/types.hpp"
#include "surfcomp/metrics/metrics.hpp"
#include "surfcomp/render/camera.hpp"

namespace surfcomp::testing {

/// Exhaustive nearest neighbor; ties go to the lowest index.
Neighbor brute_nearest(const std::vector<Vec3>& points, const Vec3& q, Norm norm);

/// Closest point on a triangle by Voronoi-region classification.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

double point_mesh_distance(const Vec3& p, const TriangleMesh& mesh);

/// Ray parameter t of the ray-triangle hit (Moller-Trumbore), if any.
std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c);

/// Camera-frame depth of the first surface seen through the center of pixel
/// (u, v), by casting against every triangle.
std::optional<double> ray_cast_depth(const TriangleMesh& mesh, const CameraIntrinsics& k, const CameraPose& pose,
                                     int u, int v);

/// Straight O(|P| |Q|) evaluation with plain loops and left-to-right sums.
MetricsReport reference_evaluate(const PointCloud& pred, const PointCloud& gt, const MetricsConfig& config);

}  // namespace surfcomp::testing
