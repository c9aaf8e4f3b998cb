#include "surfcomp/render/camera.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "surfcomp/util/error.hpp"
#include "surfcomp/util/rng.hpp"

namespace surfcomp {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw PreconditionError("focal lengths must be positive");
  if (width < 1 || height < 1) throw PreconditionError("image must be at least 1x1 pixels");
  if (!(cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height)) {
    throw PreconditionError("principal point lies outside the image");
  }
}

CameraIntrinsics default_intrinsics() { return CameraIntrinsics{}; }

namespace {

/// Columns (right, down, forward) for zero roll. For |pitch| <= pi/2 the cross
/// product forward x Z equals cos(pitch) * (sin yaw, -cos yaw, 0), so the right
/// vector is taken from yaw directly; this stays defined at the poles.
Mat3 rotation_from_angles(double pitch, double yaw) {
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const Vec3 forward(cp * cy, cp * sy, sp);
  const Vec3 right(sy, -cy, 0.0);
  const Vec3 down = forward.cross(right).normalized();
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  return r;
}

}  // namespace

CameraPose::CameraPose(const Vec3& position, double pitch, double yaw)
    : position_(position), pitch_(pitch), yaw_(yaw) {
  if (!position.allFinite() || !std::isfinite(pitch) || !std::isfinite(yaw)) {
    throw PreconditionError("camera pose components must be finite");
  }
  if (std::abs(pitch) > std::numbers::pi / 2) {
    throw PreconditionError("|pitch| must not exceed pi/2");
  }
  rotation_ = rotation_from_angles(pitch, yaw);
}

CameraPose CameraPose::look_at(const Vec3& position, const Vec3& target) {
  const Vec3 d = target - position;
  const double len = d.norm();
  if (!(len > 0.0)) throw PreconditionError("look_at target coincides with the camera");
  const Vec3 f = d / len;
  const double pitch = std::asin(std::clamp(f.z(), -1.0, 1.0));
  const double yaw = std::atan2(f.y(), f.x());
  // Forward is taken verbatim so the look-at direction is exact; right/down
  // follow the zero-roll construction.
  Mat3 r = rotation_from_angles(pitch, yaw);
  r.col(2) = f;
  r.col(1) = f.cross(r.col(0)).normalized();
  return CameraPose(position, pitch, yaw, r);
}

CameraPose CameraPose::from_world_from_camera(const Mat4& m) {
  const Mat3 r = m.topLeftCorner<3, 3>();
  const Vec3 t = m.topRightCorner<3, 1>();
  if (!m.allFinite() || !(r.transpose() * r).isApprox(Mat3::Identity(), 1e-6) ||
      std::abs(r.determinant() - 1.0) > 1e-6) {
    throw PreconditionError("world_from_camera rotation is not a proper rotation");
  }
  const Vec3 f = r.col(2);
  const double pitch = std::asin(std::clamp(f.z(), -1.0, 1.0));
  const double yaw = std::atan2(f.y(), f.x());
  return CameraPose(t, pitch, yaw, r);
}

Mat4 CameraPose::world_from_camera() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = position_;
  return m;
}

CameraPose pose_from_waypoint(const TrajectoryWaypoint& wp) {
  return CameraPose(Vec3(wp.x, wp.y, wp.z), wp.pitch, wp.yaw);
}

std::optional<Projection> project(const CameraIntrinsics& k, const CameraPose& pose,
                                  const Vec3& world) {
  const Vec3 c = pose.to_camera(world);
  if (!(c.z() > 0.0)) return std::nullopt;
  return Projection{k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy, c.z()};
}

Vec3 unproject_pixel(const CameraIntrinsics& k, const CameraPose& pose, int u, int v, double z) {
  const Vec3 c((u + 0.5 - k.cx) * z / k.fx, (v + 0.5 - k.cy) * z / k.fy, z);
  return pose.to_world(c);
}

std::vector<CameraPose> random_viewpoints(const Aabb& bounds, std::size_t n, std::uint64_t seed) {
  return random_viewpoints(bounds, n, seed, ViewpointBand{});
}

std::vector<CameraPose> random_viewpoints(const Aabb& bounds, std::size_t n, std::uint64_t seed,
                                          const ViewpointBand& band) {
  if (n == 0) throw PreconditionError("viewpoint count must be >= 1");
  const double r = bounds.bounding_radius();
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw DegenerateGeometryError("viewpoint bounds have zero size");
  }
  constexpr double kDeg = std::numbers::pi / 180.0;
  const Vec3 center = bounds.center();
  Rng rng(seed);
  std::vector<CameraPose> poses;
  poses.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double radius = r * rng.uniform(band.min_radius_factor, band.max_radius_factor);
    const double azimuth = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double elevation = kDeg * rng.uniform(band.min_elevation_deg, band.max_elevation_deg);
    const Vec3 offset(std::cos(elevation) * std::cos(azimuth),
                      std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
    poses.push_back(CameraPose::look_at(center + radius * offset, center));
  }
  return poses;
}

}  // namespace surfcomp
