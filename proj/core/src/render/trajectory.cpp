#include "surfcomp/render/trajectory.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "surfcomp/util/error.hpp"

namespace surfcomp {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> cells_of(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

}  // namespace

std::vector<TrajectoryWaypoint> read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory '" + path.string() + "'");
  static constexpr std::array<const char*, 5> kColumns{"x", "y", "z", "pitch", "yaw"};
  std::array<int, 5> column{-1, -1, -1, -1, -1};
  std::vector<TrajectoryWaypoint> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const auto cells = cells_of(line);
    if (!header) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
          if (cells[i] == kColumns[c]) column[c] = static_cast<int>(i);
        }
      }
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        if (column[c] < 0) {
          throw ParseError(fmt::format("trajectory header lacks column '{}'", kColumns[c]), line_no,
                           ParseError::Unit::kLine);
        }
      }
      header = true;
      continue;
    }
    std::array<double, 5> v{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      const auto idx = static_cast<std::size_t>(column[c]);
      if (idx >= cells.size()) throw ParseError("trajectory row has too few cells", line_no, ParseError::Unit::kLine);
      const std::string& cell = cells[idx];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v[c]);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError(fmt::format("'{}' is not a number", cell), line_no, ParseError::Unit::kLine);
      }
    }
    out.push_back({v[0], v[1], v[2], v[3] * kDegToRad, v[4] * kDegToRad});
  }
  if (!header) throw ParseError("trajectory is empty", line_no, ParseError::Unit::kLine);
  return out;
}

void write_trajectory_csv(const std::vector<TrajectoryWaypoint>& waypoints, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "x,y,z,pitch,yaw\n";
  for (const auto& w : waypoints) {
    out << fmt::format("{},{},{},{},{}\n", w.x, w.y, w.z, w.pitch / kDegToRad, w.yaw / kDegToRad);
  }
}

}  // namespace surfcomp
