#pragma once

#include <filesystem>
#include <vector>

#include "surfcomp/render/camera.hpp"

namespace surfcomp {

/// Reads a waypoint CSV with header x,y,z,pitch,yaw (columns in any order).
/// Angles are stored in degrees and returned in radians. Throws ParseError
/// with the offending line number.
std::vector<TrajectoryWaypoint> read_trajectory_csv(const std::filesystem::path& path);

void write_trajectory_csv(const std::vector<TrajectoryWaypoint>& waypoints, const std::filesystem::path& path);

}  // namespace surfcomp
