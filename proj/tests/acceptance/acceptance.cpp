// One line per primary acceptance criterion; exit status is the number of failures.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "surfcomp/dataset/builder.hpp"
#include "surfcomp/geometry/mesh_io.hpp"
#include "surfcomp/geometry/normalize.hpp"
#include "surfcomp/metrics/metrics.hpp"
#include "surfcomp/partial/partial.hpp"
#include "surfcomp/render/rasterizer.hpp"
#include "surfcomp/segmentation/export.hpp"
#include "surfcomp/segmentation/pipeline.hpp"
#include "surfcomp/segmentation/slicer.hpp"
#include "surfcomp/util/log.hpp"

using namespace surfcomp;
using namespace surfcomp::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Outcome of one criterion: pass flag plus a short measured summary.
struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

bool rel_close(double got, double want, double rel) {
  return std::abs(got - want) <= rel * std::max(std::abs(want), 1e-300);
}

/// Prediction near the ground truth: a jittered subset plus uniform outliers.
PointCloud noisy_copy(const PointCloud& gt, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 8e-4);
  std::uniform_int_distribution<std::size_t> pick(0, gt.size() - 1);
  std::uniform_real_distribution<double> box(-0.5, 0.5);
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 10 == 9) out.emplace_back(box(rng), box(rng), box(rng));
    else out.push_back(gt[pick(rng)] + Vec3(noise(rng), noise(rng), noise(rng)));
  }
  return PointCloud(std::move(out));
}

Outcome metrics_oracle() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> size(512, 2048);
  const MetricsConfig cfg;
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 50; ++i) {
    const PointCloud gt = random_cloud(size(rng), 1000 + i);
    const PointCloud pred = i % 2 ? random_cloud(size(rng), 2000 + i) : noisy_copy(gt, size(rng), rng);
    const MetricsReport got = evaluate(pred, gt, cfg);
    const MetricsReport want = reference_evaluate(pred, gt, cfg);
    const double pairs[][2] = {{got.l1_cd, want.l1_cd},     {got.l2_cd, want.l2_cd},
                               {got.precision, want.precision}, {got.recall, want.recall},
                               {got.fscore, want.fscore},   {got.auc, want.auc}};
    for (const auto& [g, w] : pairs) {
      if (w != 0.0) worst = std::max(worst, std::abs(g - w) / std::abs(w));
      o.require(rel_close(g, w, 1e-12) || g == w, fmt::format("pair {}: {} vs {}", i, g, w));
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 30.0, fmt::format("took {:.1f} s", secs));
  if (o.pass) o.detail = fmt::format("50 pairs, max rel err {:.2e}, {:.2f} s", worst, secs);
  return o;
}

Outcome metric_identities() {
  Outcome o;
  for (int i = 0; i < 10; ++i) {
    const PointCloud p = random_cloud(256 + 100 * i, 300 + i);
    const MetricsReport r = evaluate(p, p);
    o.require(r.l1_cd == 0 && r.l2_cd == 0 && r.precision == 1 && r.recall == 1 && r.fscore == 1 && r.auc == 1,
              fmt::format("cloud {} not an identity", i));
  }
  const PointCloud two({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  const PointCloud one({Vec3(0, 0, 0)});
  const double cd = chamfer(two, one, Norm::kL2);
  const auto [precision, recall] = precision_recall(two, one, 0.5);
  const double f = fscore(precision, recall);
  o.require(std::abs(cd - 0.25) <= 1e-12, fmt::format("CD {}", cd));
  o.require(precision == 0.5 && recall == 1.0, fmt::format("P {} R {}", precision, recall));
  o.require(std::abs(f - 2.0 / 3.0) <= 1e-9, fmt::format("F {}", f));
  if (o.pass) o.detail = fmt::format("10 clouds exact; hand case CD {} P {} R {} F {:.10f}", cd, precision, recall, f);
  return o;
}

Outcome auc_step() {
  Outcome o;
  std::vector<Vec3> a, b;
  for (int i = 0; i < 200; ++i) {
    a.emplace_back(i * 1.0, 0, 0);
    b.emplace_back(i * 1.0, 1e-3, 0);
  }
  MetricsConfig cfg;
  cfg.auc_samples = 64;
  const double got = auc(PointCloud(a), PointCloud(b), cfg);
  const double tol = 1.0 / static_cast<double>(cfg.auc_samples - 1);
  o.require(std::abs(got - 0.5) <= tol, fmt::format("AUC {}", got));
  if (o.pass) o.detail = fmt::format("AUC {:.6f}, |err| {:.2e} <= {:.2e}", got, std::abs(got - 0.5), tol);
  return o;
}

Outcome render_round_trip() {
  Outcome o;
  const TriangleMesh mesh = random_mesh(200, 77);
  const Aabb bounds = mesh.bounds();
  const double diameter = bounds.extent().norm();
  const auto t0 = Clock::now();
  const auto poses = random_viewpoints(bounds, 20, 5);
  const CameraIntrinsics k = default_intrinsics();
  std::size_t total = 0, close = 0;
  for (const auto& pose : poses) {
    const PointCloud cloud = backproject(ViewBundle{render(mesh, k, pose).depth, k, pose});
    total += cloud.size();
    for (const auto& p : cloud.points()) close += point_mesh_distance(p, mesh) <= 1e-4 * diameter;
  }
  const double secs = seconds_since(t0);
  const double frac = total ? static_cast<double>(close) / static_cast<double>(total) : 0.0;
  o.require(total > 0, "no pixels rendered");
  o.require(frac >= 0.99, fmt::format("{:.4f} of points within tolerance", frac));
  o.require(secs < 10.0, fmt::format("took {:.1f} s", secs));
  if (o.pass) o.detail = fmt::format("{} points, {:.4f} within 1e-4 diameter, {:.2f} s", total, frac, secs);
  return o;
}

Outcome normalization() {
  Outcome o;
  for (int i = 0; i < 20; ++i) {
    TriangleMesh m = random_mesh(30 + 5 * i, 500 + i, 0.1 + 3.0 * i);
    m = transform_mesh(m, {1.0, Vec3(i * 7.0, -3.0 * i, 11.0)});
    const TriangleMesh n = normalize_to_unit_cube(m).mesh;
    const Aabb b = n.bounds();
    o.require(std::abs(b.max_extent() - 1.0) <= 1e-9, fmt::format("mesh {} extent {}", i, b.max_extent()));
    o.require(b.center().norm() <= 1e-9, fmt::format("mesh {} center off by {}", i, b.center().norm()));
    const TriangleMesh twice = normalize_to_unit_cube(n).mesh;
    double drift = 0.0;
    for (std::size_t v = 0; v < n.vertices().size(); ++v) {
      drift = std::max(drift, (twice.vertices()[v] - n.vertices()[v]).norm());
    }
    o.require(drift <= 1e-9, fmt::format("mesh {} not idempotent ({})", i, drift));
  }
  if (o.pass) o.detail = "20 meshes";
  return o;
}

using TriangleKey = std::array<std::array<double, 3>, 3>;

std::multiset<TriangleKey> triangle_keys(const TriangleMesh& m) {
  std::multiset<TriangleKey> out;
  for (const auto& t : m.triangles()) {
    TriangleKey k;
    for (std::size_t i = 0; i < 3; ++i) {
      const Vec3& v = m.vertices()[t[i]];
      k[i] = {v.x(), v.y(), v.z()};
    }
    std::sort(k.begin(), k.end());
    out.insert(k);
  }
  return out;
}

Outcome slicing_partition() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> size(0.4, 0.9), height(0.3, 2.0);
  for (int n = 2; n <= 5; ++n) {
    std::vector<std::pair<Vec3, Vec3>> boxes;
    std::vector<std::pair<Vec2, Vec2>> footprints;
    std::vector<TriangleMesh> parts;
    for (int i = 0; i < n; ++i) {
      // One box per 1.5-wide cell along X, so boxes never touch.
      const Vec3 lo(1.5 * i, -0.5 * size(rng), 0.0);
      const Vec3 hi(lo.x() + size(rng), 0.5 * size(rng), height(rng));
      boxes.emplace_back(lo, hi);
      footprints.emplace_back(lo.head<2>(), hi.head<2>());
      parts.push_back(make_box(lo, hi));
    }
    const TriangleMesh scene = merge(parts);
    const BevRender bev = render_bev(scene, BevOptions{256});
    const SliceResult r = slice_by_mask(scene, footprint_mask(bev.frame, footprints), bev.frame);
    o.require(r.segments.size() == boxes.size(), fmt::format("{} boxes: {} segments", n, r.segments.size()));
    for (std::size_t i = 0; i < r.segments.size() && i < boxes.size(); ++i) {
      o.require(triangle_keys(r.segments[i].submesh) == triangle_keys(make_box(boxes[i].first, boxes[i].second)),
                fmt::format("{} boxes: box {} not recovered", n, i));
    }

    parts.push_back(make_ground(Vec2(-1, -1.5), Vec2(1.5 * n, 1.5), 0.0, 4));
    const TriangleMesh crossing = merge(parts);
    const BevRender bev2 = render_bev(crossing, BevOptions{200});
    const SliceResult c = slice_by_mask(crossing, footprint_mask(bev2.frame, footprints), bev2.frame);
    double area = c.unassigned.surface_area();
    for (const auto& s : c.segments) area += s.submesh.surface_area();
    o.require(c.report.boundary_split > 0, fmt::format("{} boxes: no triangle crossed a boundary", n));
    o.require(rel_close(area, crossing.surface_area(), 1e-6),
              fmt::format("{} boxes: area {} vs {}", n, area, crossing.surface_area()));
  }
  if (o.pass) o.detail = "2-5 boxes exact, area conserved";
  return o;
}

std::string file_bytes(const fs::path& p) { return read_text(p); }

Outcome dataset_build() {
  Outcome o;
  TempDir in, a, b;
  std::vector<ModelInput> inputs;
  for (int i = 0; i < 10; ++i) {
    const fs::path p = in / fmt::format("toy{:02}.obj", i);
    save_mesh(make_box(Vec3(0, 0, 0), Vec3(1.0 + 0.2 * i, 1.5, 0.5 + 0.1 * i)), p);
    inputs.push_back({fmt::format("toy{:02}", i), p, ModelProvenance::kSegmented});
  }
  GenerationParams params;
  params.seed = 7;
  const auto t0 = Clock::now();
  const DatasetManifest m = build_dataset(inputs, a.path(), params);
  const double secs = seconds_since(t0);
  o.require(m.models.size() == 10 && m.failures.empty(), "not every model built");
  std::size_t train = 0;
  for (const auto& e : m.models) {
    train += e.split == Split::kTrain;
    o.require(e.rgb_paths.size() == 15 && e.depth_paths.size() == 15 && e.camera_paths.size() == 15 &&
                  e.partial_paths.size() == 15,
              e.id + ": artifact counts");
    for (const auto& list : {e.rgb_paths, e.depth_paths, e.camera_paths}) {
      for (const auto& p : list) o.require(fs::exists(a / p), e.id + ": missing " + p);
    }
    for (const auto& p : e.partial_paths) {
      o.require(load_point_cloud(a / p).size() == 2048, e.id + ": partial size " + p);
    }
    o.require(load_point_cloud(a / e.gt_path).size() == 2048, e.id + ": gt size");
  }
  o.require(train == 7, fmt::format("{} train models", train));
  const ValidationReport report = validate_dataset(a / "manifest.json");
  o.require(report.passed(), fmt::format("validate: {} failures", report.failures().size()));

  build_dataset(inputs, b.path(), params);
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a.path());
    o.require(fs::exists(b.path() / rel) && file_bytes(entry.path()) == file_bytes(b.path() / rel),
              "rebuild differs at " + rel.string());
    ++compared;
  }
  o.require(secs < 120.0, fmt::format("took {:.1f} s", secs));
  if (o.pass) {
    o.detail = fmt::format("10 models, 7/3 split, {} checks, {} files identical, build {:.1f} s",
                           report.checks.size(), compared, secs);
  }
  return o;
}

Outcome hermetic_pipeline() {
  Outcome o;
  const TriangleMesh scene =
      merge({make_ground(Vec2(-2, -2), Vec2(2, 2), 0.0, 3), make_box(Vec3(-1.6, -1.2, 0), Vec3(-0.6, 0.9, 1.0)),
             make_box(Vec3(0.3, 0.4, 0), Vec3(1.5, 1.5, 0.6)), make_box(Vec3(0.2, -1.5, 0), Vec3(1.2, -0.5, 1.4))});
  ProviderConfig providers;  // no endpoints: fallback providers only
  SegmentationParams seg;
  seg.bev_resolution = 256;
  const SegmentationResult r = segment_scene_auto(scene, providers, seg);
  const auto accepted = std::count_if(r.segments.begin(), r.segments.end(),
                                      [](const SegmentRecord& s) { return s.status == SegmentStatus::kAccepted; });
  o.require(accepted == 3, fmt::format("{} accepted segments", accepted));

  TempDir work;
  export_segments(r.segments, work / "segments", true);
  GenerationParams params;
  params.views = 3;
  params.points = 2048;
  const DatasetManifest m = build_dataset(collect_build_inputs({work / "segments"}), work / "dataset", params, providers);
  o.require(m.models.size() == 3 && m.failures.empty(), fmt::format("{} models built", m.models.size()));
  o.require(validate_dataset(work / "dataset/manifest.json").passed(), "validate failed");
  double worst_f = 1.0;
  for (const auto& e : m.models) {
    const PointCloud gt = load_point_cloud(work / "dataset" / e.gt_path);
    const PointCloud partial = load_point_cloud(work / "dataset" / e.partial_paths[0]);
    const MetricsReport rep = evaluate(partial, gt);
    o.require(std::isfinite(rep.l1_cd) && std::isfinite(rep.auc), e.id + ": non-finite metrics");
    worst_f = std::min(worst_f, rep.fscore);
  }
  if (o.pass) o.detail = fmt::format("3 accepted, 3 models built and evaluated (min F {:.3f})", worst_f);
  return o;
}

}  // namespace

int main() {
  logger()->set_level(spdlog::level::warn);
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"metrics match brute-force reference", metrics_oracle},
      {"metric identities and hand case", metric_identities},
      {"AUC step function", auc_step},
      {"render/back-project round trip", render_round_trip},
      {"normalization", normalization},
      {"slicing partition", slicing_partition},
      {"dataset build", dataset_build},
      {"hermetic pipeline", hermetic_pipeline},
  };
  int failures = 0;
  int index = 1;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", index++, name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures;
}
