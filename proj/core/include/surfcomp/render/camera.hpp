#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "surfcomp/geometry/types.hpp"

namespace surfcomp {

/// Pinhole intrinsics. Pixel (u, v) covers [u, u+1) x [v, v+1); its center is
/// at (u + 0.5, v + 0.5) in the continuous image plane.
struct CameraIntrinsics {
  double fx = 256.0;
  double fy = 256.0;
  double cx = 112.0;
  double cy = 112.0;
  int width = 224;
  int height = 224;

  /// Throws PreconditionError on non-positive focal length, empty image or a
  /// principal point outside the image.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

/// 224 x 224, fx = fy = 256, principal point at the image center.
CameraIntrinsics default_intrinsics();

/// Camera position plus pitch (above horizon) and yaw (CCW from +X about +Z);
/// roll is always zero. Camera axes: X right, Y down, Z forward.
struct TrajectoryWaypoint {
  double x = 0, y = 0, z = 0;
  double pitch = 0, yaw = 0;
};

class CameraPose {
 public:
  CameraPose() : CameraPose(Vec3::Zero(), 0.0, 0.0) {}
  /// Throws PreconditionError when |pitch| > pi/2 or any value is not finite.
  CameraPose(const Vec3& position, double pitch, double yaw);

  /// Looks from `position` toward `target`. Throws when they coincide.
  static CameraPose look_at(const Vec3& position, const Vec3& target);

  /// Adopts a rigid world-from-camera transform as stored in camera sidecars.
  /// Throws PreconditionError when the rotation block is not orthonormal
  /// with determinant +1 (tolerance 1e-6).
  static CameraPose from_world_from_camera(const Mat4& world_from_camera);

  const Vec3& position() const { return position_; }
  double pitch() const { return pitch_; }
  double yaw() const { return yaw_; }
  /// Columns are (right, down, forward) in world coordinates.
  const Mat3& rotation() const { return rotation_; }
  Vec3 right() const { return rotation_.col(0); }
  Vec3 down() const { return rotation_.col(1); }
  Vec3 forward() const { return rotation_.col(2); }

  Mat4 world_from_camera() const;
  Vec3 to_camera(const Vec3& world) const { return rotation_.transpose() * (world - position_); }
  Vec3 to_world(const Vec3& camera) const { return rotation_ * camera + position_; }

 private:
  CameraPose(const Vec3& position, double pitch, double yaw, const Mat3& rotation)
      : position_(position), pitch_(pitch), yaw_(yaw), rotation_(rotation) {}

  Vec3 position_;
  double pitch_;
  double yaw_;
  Mat3 rotation_;
};

CameraPose pose_from_waypoint(const TrajectoryWaypoint& wp);

/// Continuous pixel coordinates and camera Z of a world point; nullopt when the
/// point is not in front of the camera.
struct Projection {
  double u;
  double v;
  double z;
};
std::optional<Projection> project(const CameraIntrinsics& k, const CameraPose& pose,
                                  const Vec3& world);

/// World point seen at pixel index (u, v) with camera-frame depth z.
Vec3 unproject_pixel(const CameraIntrinsics& k, const CameraPose& pose, int u, int v,
                     double z);

/// Random-mode viewpoints: positions on a spherical shell around the bounds
/// center (radius uniform in [1.5, 2.5] x bounding radius, azimuth uniform in
/// [0, 2pi), elevation uniform in [15, 75] degrees), each looking at the center.
/// Throws DegenerateGeometryError for zero-size bounds.
std::vector<CameraPose> random_viewpoints(const Aabb& bounds, std::size_t n, std::uint64_t seed);

struct ViewpointBand {
  double min_radius_factor = 1.5;
  double max_radius_factor = 2.5;
  double min_elevation_deg = 15.0;
  double max_elevation_deg = 75.0;
};
std::vector<CameraPose> random_viewpoints(const Aabb& bounds, std::size_t n, std::uint64_t seed,
                                          const ViewpointBand& band);

}  // namespace surfcomp
