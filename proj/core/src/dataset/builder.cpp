#include "surfcomp/dataset/builder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "surfcomp/geometry/mesh_io.hpp"
#include "surfcomp/geometry/normalize.hpp"
#include "surfcomp/geometry/sampling.hpp"
#include "surfcomp/partial/partial.hpp"
#include "surfcomp/providers/clients.hpp"
#include "surfcomp/render/image_io.hpp"
#include "surfcomp/render/rasterizer.hpp"
#include "surfcomp/segmentation/export.hpp"
#include "surfcomp/util/error.hpp"
#include "surfcomp/util/log.hpp"
#include "surfcomp/util/parallel.hpp"
#include "surfcomp/util/rng.hpp"

namespace surfcomp {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(ModelProvenance p) {
  return p == ModelProvenance::kImported ? "imported" : "segmented";
}

const char* to_string(Split s) { return s == Split::kTest ? "test" : "train"; }

namespace {

bool is_mesh_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".obj" || ext == ".ply" || ext == ".OBJ" || ext == ".PLY";
}

std::string safe_id(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "model";
  return out;
}

std::vector<fs::path> mesh_files_in(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_mesh_file(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string index_name(std::size_t i, std::size_t count) {
  std::size_t digits = 2;
  for (std::size_t n = count; n >= 100; n /= 10) ++digits;
  return fmt::format("{:0{}}", i, digits);
}

json entry_to_json(const ModelEntry& m) {
  return {{"id", m.id},
          {"seed", m.seed},
          {"mesh_path", m.mesh_path},
          {"caption_path", m.caption_path},
          {"gt_path", m.gt_path},
          {"rgb_paths", m.rgb_paths},
          {"depth_paths", m.depth_paths},
          {"camera_paths", m.camera_paths},
          {"partial_paths", m.partial_paths},
          {"split", to_string(m.split)},
          {"provenance", to_string(m.provenance)}};
}

ModelEntry entry_from_json(const json& j) {
  ModelEntry m;
  m.id = j.at("id").get<std::string>();
  m.seed = j.value("seed", std::uint64_t{0});
  m.mesh_path = j.at("mesh_path").get<std::string>();
  m.caption_path = j.value("caption_path", "");
  m.gt_path = j.value("gt_path", "");
  m.rgb_paths = j.value("rgb_paths", std::vector<std::string>{});
  m.depth_paths = j.value("depth_paths", std::vector<std::string>{});
  m.camera_paths = j.value("camera_paths", std::vector<std::string>{});
  m.partial_paths = j.value("partial_paths", std::vector<std::string>{});
  m.split = j.value("split", "train") == "test" ? Split::kTest : Split::kTrain;
  m.provenance = j.value("provenance", "segmented") == "imported" ? ModelProvenance::kImported
                                                                   : ModelProvenance::kSegmented;
  return m;
}

ModelEntry build_model(const ModelInput& input, const fs::path& out_dir, const GenerationParams& params,
                       const ProviderConfig& providers) {
  ModelEntry entry;
  entry.id = input.id;
  entry.provenance = input.provenance;
  entry.seed = derive_seed(params.seed, input.id);

  const TriangleMesh raw = load_mesh(input.mesh_path);
  const NormalizedMesh normalized = normalize_to_unit_cube(raw);
  const TriangleMesh& mesh = normalized.mesh;

  const fs::path root = out_dir / input.id;
  fs::create_directories(root);
  entry.mesh_path = input.id + "/mesh.ply";
  save_mesh(mesh, out_dir / entry.mesh_path);
  if (params.meshes_only) return entry;

  entry.gt_path = input.id + "/gt.ply";
  save_point_cloud(sample_surface(mesh, params.points, derive_seed(entry.seed, "gt")), out_dir / entry.gt_path);

  for (const char* sub : {"rgb", "depth", "cam", "partial"}) fs::create_directories(root / sub);

  const auto poses = random_viewpoints(mesh.bounds(), params.views, derive_seed(entry.seed, "viewpoints"));
  std::vector<ViewBundle> bundles;
  std::vector<RgbImage> rgbs;
  bundles.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    RenderOutput out = render(mesh, params.intrinsics, poses[i]);
    const std::string n = index_name(i, params.views);
    entry.rgb_paths.push_back(input.id + "/rgb/" + n + ".png");
    entry.depth_paths.push_back(input.id + "/depth/" + n + ".png");
    entry.camera_paths.push_back(input.id + "/cam/" + n + ".json");
    write_png(out.rgb, out_dir / entry.rgb_paths.back());
    write_depth_png(out.depth, out_dir / entry.depth_paths.back());
    write_camera_json(params.intrinsics, poses[i], out_dir / entry.camera_paths.back());
    rgbs.push_back(std::move(out.rgb));
    bundles.push_back(ViewBundle{std::move(out.depth), params.intrinsics, poses[i]});
  }

  const auto partials =
      make_partials_from_views(bundles, params.views, params.points, derive_seed(entry.seed, "partials"));
  for (std::size_t i = 0; i < partials.size(); ++i) {
    const std::string n = index_name(i, params.views);
    entry.partial_paths.push_back(input.id + "/partial/" + n + ".ply");
    save_point_cloud(partials[i].cloud, out_dir / entry.partial_paths.back());
    const json sidecar{{"view_ids", partials[i].view_ids},
                       {"seed", partials[i].seed},
                       {"n_points", partials[i].cloud.size()}};
    const std::string text = sidecar.dump(2) + "\n";
    write_bytes({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()},
                root / "partial" / (n + ".json"));
  }

  // Captions describe the model at its original scale.
  const Caption caption = caption_segment(providers, rgbs, raw.bounds());
  entry.caption_path = input.id + "/caption.txt";
  const std::string text = caption.text + "\n";
  write_bytes({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}, out_dir / entry.caption_path);
  return entry;
}

void write_manifest_atomically(const DatasetManifest& manifest, const fs::path& out_dir) {
  const fs::path final_path = out_dir / "manifest.json";
  const fs::path tmp_path = out_dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp_path.string() + "'");
    out << manifest_to_string(manifest);
    out.flush();
    if (!out) throw IoError("short write to '" + tmp_path.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp_path, final_path, ec);
  if (ec) throw IoError("cannot rename manifest into place: " + ec.message());
}

}  // namespace

std::vector<ModelInput> collect_build_inputs(const std::vector<fs::path>& paths, ModelProvenance provenance) {
  std::vector<ModelInput> inputs;
  auto add = [&](std::string id, fs::path mesh) {
    inputs.push_back({safe_id(id), std::move(mesh), provenance});
  };
  for (const fs::path& p : paths) {
    if (fs::is_directory(p)) {
      if (fs::exists(p / "segments.json")) {
        for (const ExportedSegment& s : read_segments_manifest(p / "segments.json")) {
          if (s.status == SegmentStatus::kAccepted) add(s.id, s.mesh_path);
        }
      } else {
        for (const fs::path& f : mesh_files_in(p)) add(f.stem().string(), f);
      }
    } else if (fs::exists(p)) {
      add(p.stem().string(), p);
    } else {
      throw IoError("input '" + p.string() + "' does not exist");
    }
  }
  // Disambiguate repeated ids in input order.
  std::map<std::string, int> seen;
  std::set<std::string> taken;
  for (const auto& in : inputs) taken.insert(in.id);
  for (auto& in : inputs) {
    if (seen[in.id]++ == 0) continue;
    std::string candidate;
    for (int k = seen[in.id];; ++k) {
      candidate = fmt::format("{}-{}", in.id, k);
      if (!taken.count(candidate)) break;
    }
    taken.insert(candidate);
    in.id = candidate;
  }
  return inputs;
}

std::vector<Split> assign_splits(const std::vector<std::string>& ids, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw PreconditionError("split ratio must lie in [0, 1]");
  const std::size_t n = ids.size();
  std::vector<Split> out(n, Split::kTest);
  if (n == 0) return out;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const std::uint64_t split_seed = derive_seed(seed, "split");
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ha = derive_seed(split_seed, ids[a]);
    const auto hb = derive_seed(split_seed, ids[b]);
    return ha != hb ? ha < hb : ids[a] < ids[b];
  });
  const auto train = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))));
  for (std::size_t r = 0; r < std::min(train, n); ++r) out[order[r]] = Split::kTrain;
  return out;
}

DatasetManifest build_dataset(const std::vector<ModelInput>& inputs, const fs::path& out_dir,
                              const GenerationParams& params, const ProviderConfig& providers) {
  if (inputs.empty()) throw PreconditionError("build needs at least one input model");
  if (params.views == 0 && !params.meshes_only) throw PreconditionError("views must be positive");
  if (params.points == 0) throw PreconditionError("points must be positive");
  params.intrinsics.validate();
  {
    std::set<std::string> ids;
    for (const auto& in : inputs) {
      if (!ids.insert(in.id).second) throw PreconditionError("duplicate model id '" + in.id + "'");
    }
  }
  fs::create_directories(out_dir);

  std::vector<std::optional<ModelEntry>> built(inputs.size());
  std::vector<BuildFailure> failures;
  std::mutex failures_mutex;
  parallel_for(inputs.size(), params.workers, [&](std::size_t i) {
    try {
      built[i] = build_model(inputs[i], out_dir, params, providers);
    } catch (const std::exception& e) {
      logger()->warn("model '{}' failed: {}", inputs[i].id, e.what());
      std::lock_guard lock(failures_mutex);
      failures.push_back({inputs[i].id, inputs[i].mesh_path.generic_string(), e.what()});
    }
  });

  DatasetManifest manifest;
  manifest.params = params;
  for (auto& b : built) {
    if (b) manifest.models.push_back(std::move(*b));
  }
  std::sort(manifest.models.begin(), manifest.models.end(),
            [](const ModelEntry& a, const ModelEntry& b) { return a.id < b.id; });
  std::sort(failures.begin(), failures.end(),
            [](const BuildFailure& a, const BuildFailure& b) { return a.id < b.id; });
  manifest.failures = std::move(failures);

  std::vector<std::string> ids;
  for (const auto& m : manifest.models) ids.push_back(m.id);
  const auto splits = assign_splits(ids, params.split_ratio, params.seed);
  for (std::size_t i = 0; i < splits.size(); ++i) manifest.models[i].split = splits[i];

  write_manifest_atomically(manifest, out_dir);
  logger()->info("built {} models ({} failed) into {}", manifest.models.size(), manifest.failures.size(),
                 out_dir.string());
  return manifest;
}

DatasetManifest import_external(const fs::path& models_dir, const fs::path& out_dir, const GenerationParams& params,
                                const ProviderConfig& providers) {
  if (!fs::is_directory(models_dir)) throw IoError("'" + models_dir.string() + "' is not a directory");
  auto inputs = collect_build_inputs({models_dir}, ModelProvenance::kImported);
  if (inputs.empty()) throw PreconditionError("no .obj or .ply files in '" + models_dir.string() + "'");
  return build_dataset(inputs, out_dir, params, providers);
}

std::string manifest_to_string(const DatasetManifest& manifest) {
  json models = json::array();
  for (const auto& m : manifest.models) models.push_back(entry_to_json(m));
  json failures = json::array();
  for (const auto& f : manifest.failures) {
    failures.push_back({{"id", f.id}, {"source", f.source}, {"error", f.error}});
  }
  const json j{{"version", manifest.version},
               {"generation_params",
                {{"n_points", manifest.params.points},
                 {"views", manifest.params.views},
                 {"seed", manifest.params.seed},
                 {"split_ratio", manifest.params.split_ratio},
                 {"meshes_only", manifest.params.meshes_only}}},
               {"models", models},
               {"failures", failures}};
  return j.dump(2) + "\n";
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  DatasetManifest m;
  try {
    const json j = json::parse(in);
    m.version = j.at("version").get<std::string>();
    const json& g = j.at("generation_params");
    m.params.points = g.at("n_points").get<std::size_t>();
    m.params.views = g.at("views").get<std::size_t>();
    m.params.seed = g.at("seed").get<std::uint64_t>();
    m.params.split_ratio = g.at("split_ratio").get<double>();
    m.params.meshes_only = g.value("meshes_only", false);
    for (const auto& e : j.at("models")) m.models.push_back(entry_from_json(e));
    for (const auto& f : j.value("failures", json::array())) {
      m.failures.push_back({f.value("id", ""), f.value("source", ""), f.value("error", "")});
    }
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest: ") + e.what(), e.byte, ParseError::Unit::kByteOffset);
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what(), 0, ParseError::Unit::kByteOffset);
  }
  return m;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

std::vector<ValidationCheck> ValidationReport::failures() const {
  std::vector<ValidationCheck> out;
  for (const auto& c : checks) {
    if (!c.passed) out.push_back(c);
  }
  return out;
}

ValidationReport validate_dataset(const fs::path& manifest_path) {
  const DatasetManifest manifest = read_manifest(manifest_path);
  const fs::path root = manifest_path.parent_path();
  ValidationReport report;
  auto check = [&](std::string name, const std::string& model, const std::string& path, bool ok,
                   std::string message) {
    report.checks.push_back({std::move(name), model, path, ok, ok ? std::string() : std::move(message)});
    return ok;
  };
  auto exists = [&](const std::string& model, const std::string& rel) {
    return check("missing-path", model, rel, !rel.empty() && fs::is_regular_file(root / rel),
                 "referenced file '" + rel + "' does not exist");
  };
  auto point_count = [&](const char* name, const std::string& model, const std::string& rel) {
    try {
      const std::size_t n = load_point_cloud(root / rel).size();
      check(name, model, rel, n == manifest.params.points,
            fmt::format("'{}' has {} points, expected {}", rel, n, manifest.params.points));
    } catch (const Error& e) {
      check(name, model, rel, false, fmt::format("'{}' unreadable: {}", rel, e.what()));
    }
  };

  const std::size_t views = manifest.params.meshes_only ? 0 : manifest.params.views;
  std::size_t train = 0;
  for (const ModelEntry& m : manifest.models) {
    if (m.split == Split::kTrain) ++train;
    exists(m.id, m.mesh_path);
    const std::vector<std::pair<const char*, const std::vector<std::string>*>> arrays{
        {"rgb_paths", &m.rgb_paths},
        {"depth_paths", &m.depth_paths},
        {"camera_paths", &m.camera_paths},
        {"partial_paths", &m.partial_paths}};
    for (const auto& [field, list] : arrays) {
      check("array-length", m.id, field, list->size() == views,
            fmt::format("{} has {} entries, expected {}", field, list->size(), views));
    }
    if (manifest.params.meshes_only) continue;

    if (exists(m.id, m.gt_path)) point_count("gt-point-count", m.id, m.gt_path);
    exists(m.id, m.caption_path);
    for (const auto& p : m.rgb_paths) exists(m.id, p);
    for (const auto& p : m.partial_paths) {
      if (exists(m.id, p)) point_count("point-count", m.id, p);
    }
    for (const auto& p : m.camera_paths) exists(m.id, p);
    for (std::size_t i = 0; i < m.depth_paths.size(); ++i) {
      const std::string& p = m.depth_paths[i];
      if (!exists(m.id, p) || i >= m.camera_paths.size() || !fs::is_regular_file(root / m.camera_paths[i])) {
        continue;
      }
      try {
        const DepthImage depth = read_depth_png(root / p);
        const CameraSidecar cam = read_camera_json(root / m.camera_paths[i]);
        check("depth-dimensions", m.id, p,
              depth.width() == cam.intrinsics.width && depth.height() == cam.intrinsics.height,
              fmt::format("'{}' is {}x{}, camera says {}x{}", p, depth.width(), depth.height(), cam.intrinsics.width,
                          cam.intrinsics.height));
      } catch (const Error& e) {
        check("depth-dimensions", m.id, p, false, fmt::format("'{}' unreadable: {}", p, e.what()));
      }
    }
  }

  const std::size_t n = manifest.models.size();
  if (n > 0) {
    const double expected = manifest.params.split_ratio * static_cast<double>(n);
    check("split-ratio", "", "", std::abs(static_cast<double>(train) - expected) <= 1.0,
          fmt::format("{} of {} models are train, expected about {:.1f}", train, n, expected));
  }
  return report;
}

}  // namespace surfcomp
