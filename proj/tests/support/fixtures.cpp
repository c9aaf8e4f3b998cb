#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

namespace surfcomp::testing {

namespace fs = std::filesystem;

TriangleMesh make_box(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
  }
  // Quads as (a, b, c, d) counter-clockwise seen from outside.
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  std::vector<Triangle> t;
  for (const auto& q : quads) {
    t.push_back({static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[1]), static_cast<std::uint32_t>(q[2])});
    t.push_back({static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[2]), static_cast<std::uint32_t>(q[3])});
  }
  return TriangleMesh(std::move(v), std::move(t));
}

TriangleMesh make_ground(const Vec2& lo, const Vec2& hi, double z, int n) {
  std::vector<Vec3> v;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      v.emplace_back(lo.x() + (hi.x() - lo.x()) * i / n, lo.y() + (hi.y() - lo.y()) * j / n, z);
    }
  }
  std::vector<Triangle> t;
  auto id = [&](int i, int j) { return static_cast<std::uint32_t>(j * (n + 1) + i); };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return TriangleMesh(std::move(v), std::move(t));
}

TriangleMesh merge(const std::vector<TriangleMesh>& parts) {
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  for (const auto& p : parts) {
    const auto base = static_cast<std::uint32_t>(v.size());
    v.insert(v.end(), p.vertices().begin(), p.vertices().end());
    for (const auto& tri : p.triangles()) t.push_back({tri[0] + base, tri[1] + base, tri[2] + base});
  }
  return TriangleMesh(std::move(v), std::move(t));
}

LabelMask footprint_mask(const BevFrame& frame, const std::vector<std::pair<Vec2, Vec2>>& footprints) {
  LabelMask mask(frame.width, frame.height);
  for (int v = 0; v < frame.height; ++v) {
    for (int u = 0; u < frame.width; ++u) {
      const Vec2 w = frame.to_world(u + 0.5, v + 0.5);
      for (std::size_t i = 0; i < footprints.size(); ++i) {
        const auto& [lo, hi] = footprints[i];
        if (w.x() > lo.x() && w.x() < hi.x() && w.y() > lo.y() && w.y() < hi.y()) {
          mask.at(u, v) = static_cast<std::uint16_t>(i + 1);
        }
      }
    }
  }
  return mask;
}

PointCloud random_cloud(std::size_t n, std::uint64_t seed, double scale) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(d(gen), d(gen), d(gen));
  return PointCloud(std::move(pts));
}

TriangleMesh random_mesh(std::size_t triangles, std::uint64_t seed, double scale) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  for (std::size_t i = 0; i < triangles; ++i) {
    const auto base = static_cast<std::uint32_t>(v.size());
    for (int k = 0; k < 3; ++k) v.emplace_back(d(gen), d(gen), d(gen));
    t.push_back({base, base + 1, base + 2});
  }
  return TriangleMesh(std::move(v), std::move(t));
}

PointCloud transform(const PointCloud& cloud, const Mat3& rotation, const Vec3& translation) {
  std::vector<Vec3> pts;
  pts.reserve(cloud.size());
  for (const auto& p : cloud.points()) pts.push_back(rotation * p + translation);
  return PointCloud(std::move(pts));
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() / ("surfcomp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace surfcomp::testing
