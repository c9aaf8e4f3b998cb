#include "surfcomp/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "surfcomp/dataset/builder.hpp"
#include "surfcomp/geometry/mesh_io.hpp"
#include "surfcomp/geometry/normalize.hpp"
#include "surfcomp/metrics/batch.hpp"
#include "surfcomp/partial/partial.hpp"
#include "surfcomp/providers/clients.hpp"
#include "surfcomp/render/image_io.hpp"
#include "surfcomp/render/rasterizer.hpp"
#include "surfcomp/render/trajectory.hpp"
#include "surfcomp/segmentation/export.hpp"
#include "surfcomp/segmentation/pipeline.hpp"
#include "surfcomp/service/service.hpp"
#include "surfcomp/util/error.hpp"
#include "surfcomp/util/log.hpp"

namespace surfcomp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Settings shared by every subcommand, resolved as flags > env > config file > defaults.
struct Common {
  std::optional<fs::path> config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> mask_url, score_url, caption_url;
  std::optional<int> provider_timeout_ms;
  int verbose = 0;
  bool quiet = false;

  json file;  ///< parsed config file, empty object when none

  void load() {
    file = json::object();
    if (config_file) {
      std::ifstream in(*config_file);
      if (!in) throw UsageError("cannot open config file '" + config_file->string() + "'");
      try {
        file = json::parse(in);
      } catch (const json::exception& e) {
        throw UsageError(fmt::format("config file '{}': {}", config_file->string(), e.what()));
      }
    }
    if (quiet) logger()->set_level(spdlog::level::warn);
    else if (verbose > 0) logger()->set_level(spdlog::level::debug);
  }

  template <typename T>
  T resolve(const std::optional<T>& flag, const char* env, const char* key, T fallback) const {
    if (flag) return *flag;
    if (const char* v = std::getenv(env); v && *v) {
      try {
        if constexpr (std::is_floating_point_v<T>) return static_cast<T>(std::stod(v));
        else return static_cast<T>(std::stoull(v));
      } catch (const std::exception&) {
        throw UsageError(fmt::format("{}='{}' is not a number", env, v));
      }
    }
    if (file.contains(key)) return file.at(key).get<T>();
    return fallback;
  }

  std::uint64_t resolved_seed() const { return resolve<std::uint64_t>(seed, "SURFCOMP_SEED", "seed", 0); }
  std::size_t resolved_workers() const { return resolve<std::size_t>(workers, "SURFCOMP_WORKERS", "workers", 0); }

  ProviderConfig providers() const {
    std::optional<fs::path> f;
    if (config_file) f = config_file;
    ProviderConfig p = load_provider_config(f);
    if (mask_url) p.mask_endpoint = *mask_url;
    if (score_url) p.score_endpoint = *score_url;
    if (caption_url) p.caption_endpoint = *caption_url;
    if (provider_timeout_ms) p.timeout_ms = *provider_timeout_ms;
    return p;
  }

  const json& section(const char* name) const {
    static const json empty = json::object();
    return file.contains(name) ? file.at(name) : empty;
  }
};

void add_common(CLI::App& app, Common& c) {
  app.add_option("--config", c.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", c.seed, "Master seed");
  app.add_option("--workers", c.workers, "Worker threads (0: all cores)");
  app.add_option("--mask-url", c.mask_url, "Mask provider base URL");
  app.add_option("--score-url", c.score_url, "Relevance provider base URL");
  app.add_option("--caption-url", c.caption_url, "Caption provider base URL");
  app.add_option("--provider-timeout-ms", c.provider_timeout_ms, "Provider request timeout");
  app.add_flag("-v,--verbose", c.verbose, "More logging");
  app.add_flag("-q,--quiet", c.quiet, "Warnings and errors only");
}

void write_text(const std::string& text, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

std::string index_name(std::size_t i) { return fmt::format("{:02}", i); }

// segment -------------------------------------------------------------------

struct SegmentArgs {
  std::vector<fs::path> scenes;
  fs::path out;
  std::optional<int> lattice;
  std::optional<int> resolution;
  std::optional<double> threshold;
  std::optional<std::string> category;
};

int cmd_segment(const Common& c, const SegmentArgs& a) {
  const ProviderConfig providers = c.providers();
  SegmentationParams params;
  const json& cfg = c.section("segmentation");
  params.lattice = a.lattice.value_or(cfg.value("lattice", params.lattice));
  params.bev_resolution = a.resolution.value_or(cfg.value("bev_resolution", params.bev_resolution));
  params.relevance_threshold = a.threshold.value_or(cfg.value("relevance_threshold", params.relevance_threshold));
  params.category = a.category.value_or(cfg.value("category", params.category));
  params.seed = c.resolved_seed();
  params.workers = c.resolved_workers();

  std::vector<fs::path> files;
  for (const fs::path& p : a.scenes) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".obj" || ext == ".ply")) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  if (files.empty()) throw UsageError("no scene meshes found");

  std::size_t failed = 0;
  for (const fs::path& f : files) {
    try {
      SegmentationParams scene_params = params;
      scene_params.slice.id_prefix = f.stem().string();
      const SegmentationResult r = segment_scene_auto(load_mesh(f), providers, scene_params);
      const fs::path dir = a.out / f.stem();
      export_segments(r.segments, dir, false);
      std::size_t accepted = 0;
      for (const auto& s : r.segments) accepted += s.status == SegmentStatus::kAccepted;
      std::cout << fmt::format("{}: {} segments, {} accepted -> {}\n", f.string(), r.segments.size(), accepted,
                               dir.string());
    } catch (const Error& e) {
      ++failed;
      std::cerr << fmt::format("{}: {}\n", f.string(), e.what());
    }
  }
  return failed == 0 ? kOk : kPartialFailure;
}

// render --------------------------------------------------------------------

struct RenderArgs {
  fs::path mesh;
  fs::path out;
  std::string mode = "random";
  std::optional<fs::path> trajectory;
  std::size_t views = 15;
  bool normalize = false;
};

int cmd_render(const Common& c, const RenderArgs& a) {
  if (a.mode == "trajectory" && !a.trajectory) throw UsageError("--mode trajectory requires --traj");
  TriangleMesh mesh = load_mesh(a.mesh);
  if (a.normalize) mesh = normalize_to_unit_cube(mesh).mesh;
  const std::vector<CameraPose> poses = [&] {
    if (a.mode == "random") return random_viewpoints(mesh.bounds(), a.views, c.resolved_seed());
    std::vector<CameraPose> out;
    for (const auto& w : read_trajectory_csv(*a.trajectory)) out.push_back(pose_from_waypoint(w));
    return out;
  }();
  const CameraIntrinsics k = default_intrinsics();
  for (const char* sub : {"rgb", "depth", "cam"}) fs::create_directories(a.out / sub);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const RenderOutput r = render(mesh, k, poses[i]);
    write_png(r.rgb, a.out / "rgb" / (index_name(i) + ".png"));
    write_depth_png(r.depth, a.out / "depth" / (index_name(i) + ".png"));
    write_camera_json(k, poses[i], a.out / "cam" / (index_name(i) + ".json"));
  }
  std::cout << fmt::format("rendered {} views -> {}\n", poses.size(), a.out.string());
  return kOk;
}

// backproject ---------------------------------------------------------------

struct BackprojectArgs {
  std::vector<fs::path> depth;
  std::vector<fs::path> camera;
  fs::path out;
  std::optional<std::size_t> points;
};

int cmd_backproject(const Common& c, const BackprojectArgs& a) {
  if (a.depth.size() != a.camera.size()) throw UsageError("--depth and --camera must be given the same number of times");
  std::vector<ViewBundle> views;
  for (std::size_t i = 0; i < a.depth.size(); ++i) {
    const CameraSidecar cam = read_camera_json(a.camera[i]);
    ViewBundle v{read_depth_png(a.depth[i]), cam.intrinsics, cam.pose};
    v.validate();
    views.push_back(std::move(v));
  }
  PointCloud cloud;
  if (a.points) {
    cloud = combine_views(views, *a.points, c.resolved_seed());
  } else {
    std::vector<Vec3> all;
    for (const auto& v : views) {
      const PointCloud part = backproject(v);
      all.insert(all.end(), part.points().begin(), part.points().end());
    }
    cloud = PointCloud(std::move(all));
  }
  save_point_cloud(cloud, a.out);
  std::cout << fmt::format("{} points -> {}\n", cloud.size(), a.out.string());
  return kOk;
}

// caption -------------------------------------------------------------------

struct CaptionArgs {
  fs::path mesh;
  std::size_t views = 4;
  std::optional<fs::path> out;
};

int cmd_caption(const Common& c, const CaptionArgs& a) {
  const TriangleMesh mesh = load_mesh(a.mesh);
  const auto views = segment_views(mesh, a.views, c.resolved_seed(), default_intrinsics());
  const Caption caption = caption_segment(c.providers(), views, mesh.bounds());
  if (a.out) write_text(caption.text + "\n", *a.out);
  else std::cout << caption.text << "\n";
  return kOk;
}

// build / import --------------------------------------------------------------

struct BuildArgs {
  std::vector<fs::path> inputs;
  fs::path models_dir;
  fs::path out;
  std::optional<std::size_t> views;
  std::optional<std::size_t> points;
  std::optional<double> split;
  bool meshes_only = false;
};

GenerationParams generation_params(const Common& c, const BuildArgs& a) {
  const json& cfg = c.section("generation");
  GenerationParams p;
  p.views = a.views.value_or(cfg.value("views", p.views));
  p.points = a.points.value_or(cfg.value("points", p.points));
  p.split_ratio = a.split.value_or(cfg.value("split", p.split_ratio));
  p.meshes_only = a.meshes_only || cfg.value("meshes_only", false);
  p.seed = c.resolved_seed();
  p.workers = c.resolved_workers();
  if (p.split_ratio < 0.0 || p.split_ratio > 1.0) throw UsageError("--split must lie in [0, 1]");
  return p;
}

int report_build(const DatasetManifest& m, const fs::path& out) {
  std::size_t train = 0;
  for (const auto& e : m.models) train += e.split == Split::kTrain;
  std::cout << fmt::format("{} models ({} train, {} test) -> {}\n", m.models.size(), train, m.models.size() - train,
                           (out / "manifest.json").string());
  for (const auto& f : m.failures) std::cerr << fmt::format("failed: {} ({}): {}\n", f.id, f.source, f.error);
  return m.failures.empty() ? kOk : kPartialFailure;
}

int cmd_build(const Common& c, const BuildArgs& a) {
  const auto inputs = collect_build_inputs(a.inputs);
  if (inputs.empty()) throw UsageError("no input models found");
  return report_build(build_dataset(inputs, a.out, generation_params(c, a), c.providers()), a.out);
}

int cmd_import(const Common& c, const BuildArgs& a) {
  return report_build(import_external(a.models_dir, a.out, generation_params(c, a), c.providers()), a.out);
}

// evaluate ------------------------------------------------------------------

struct EvaluateArgs {
  std::optional<fs::path> pred, gt, pairs;
  std::optional<fs::path> csv;
  std::optional<double> tau, auc_min, auc_max;
  std::optional<std::size_t> auc_samples;
  std::optional<std::string> l2_convention;
  bool json_output = false;
};

int cmd_evaluate(const Common& c, const EvaluateArgs& a) {
  if (a.pairs.has_value() == (a.pred.has_value() || a.gt.has_value())) {
    throw UsageError("give either --pairs or both --pred and --gt");
  }
  if (!a.pairs && !(a.pred && a.gt)) throw UsageError("--pred and --gt go together");

  const json& cfg = c.section("metrics");
  MetricsConfig config;
  config.tau = a.tau.value_or(cfg.value("tau", config.tau));
  config.auc_min = a.auc_min.value_or(cfg.value("auc_min", config.auc_min));
  config.auc_max = a.auc_max.value_or(cfg.value("auc_max", config.auc_max));
  config.auc_samples = a.auc_samples.value_or(cfg.value("auc_samples", config.auc_samples));
  const std::string conv = a.l2_convention.value_or(cfg.value("l2_convention", std::string("literal-norm")));
  if (conv == "squared") config.l2_convention = L2Convention::kSquared;
  else if (conv != "literal-norm") throw UsageError("--l2-convention must be literal-norm or squared");
  try {
    config.validate();
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }

  const std::vector<EvaluationPair> pairs =
      a.pairs ? read_pairing_file(*a.pairs) : std::vector<EvaluationPair>{{*a.pred, *a.gt, a.pred->stem().string()}};
  const BatchResult batch = evaluate_batch(pairs, config, c.resolved_workers());
  if (a.csv) write_text(batch_to_csv(batch), *a.csv);
  if (a.json_output) {
    std::cout << batch_to_json(batch, config).dump(2) << "\n";
  } else {
    std::cout << batch_to_csv(batch);
  }
  for (const auto& r : batch.pairs) {
    if (!r.report) std::cerr << fmt::format("{}: {}\n", r.pair.model_id, r.error);
  }
  if (!batch.mean) return kPartialFailure;
  return batch.failures == 0 ? kOk : kPartialFailure;
}

// validate ------------------------------------------------------------------

struct ValidateArgs {
  fs::path target;
  bool json_output = false;
};

int cmd_validate(const ValidateArgs& a) {
  const fs::path manifest = fs::is_directory(a.target) ? a.target / "manifest.json" : a.target;
  const ValidationReport report = validate_dataset(manifest);
  const auto failures = report.failures();
  if (a.json_output) {
    json checks = json::array();
    for (const auto& chk : report.checks) {
      json e{{"check", chk.name}, {"passed", chk.passed}};
      if (!chk.model_id.empty()) e["model_id"] = chk.model_id;
      if (!chk.path.empty()) e["path"] = chk.path;
      if (!chk.passed) e["message"] = chk.message;
      checks.push_back(std::move(e));
    }
    std::cout << json{{"passed", report.passed()},
                      {"checks_run", report.checks.size()},
                      {"failures", failures.size()},
                      {"checks", checks}}
                     .dump(2)
              << "\n";
  } else {
    for (const auto& f : failures) {
      std::cout << fmt::format("FAIL {} [{}] {}\n", f.name, f.model_id.empty() ? "-" : f.model_id, f.message);
    }
    std::cout << fmt::format("{} checks, {} failed\n", report.checks.size(), failures.size());
  }
  return report.passed() ? kOk : kPartialFailure;
}

// serve ---------------------------------------------------------------------

struct ServeArgs {
  fs::path scene_dir;
  std::optional<fs::path> state_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t job_workers = 2;
};

int cmd_serve(const Common& c, const ServeArgs& a) {
  ServiceConfig config;
  config.host = a.host;
  config.port = a.port;
  config.scene_dir = a.scene_dir;
  if (a.state_dir) config.state_dir = *a.state_dir;
  config.providers = c.providers();
  config.segmentation.seed = c.resolved_seed();
  config.segmentation.workers = c.resolved_workers();
  config.job_workers = a.job_workers;
  Service service(std::move(config));
  const int port = service.start();
  std::cout << fmt::format("listening on http://{}:{}\n", a.host, port) << std::flush;
  service.wait();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Scene segmentation, rendering and point cloud completion dataset tools", "surfcomp"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Common common;
  add_common(app, common);

  SegmentArgs seg;
  auto* segment = app.add_subcommand("segment", "Automatic segmentation of scene meshes");
  segment->add_option("scenes", seg.scenes, "Scene mesh files or directories")->required()->check(CLI::ExistingPath);
  segment->add_option("-o,--out", seg.out, "Output directory")->required();
  segment->add_option("--lattice", seg.lattice, "Point prompt lattice size per side");
  segment->add_option("--bev-resolution", seg.resolution, "BEV image size in pixels");
  segment->add_option("--threshold", seg.threshold, "Relevance acceptance threshold");
  segment->add_option("--category", seg.category, "Category scored for relevance");

  RenderArgs ren;
  auto* render_cmd = app.add_subcommand("render", "Render RGB, depth and camera sidecars");
  render_cmd->add_option("--mesh", ren.mesh, "Mesh file")->required()->check(CLI::ExistingFile);
  render_cmd->add_option("-o,--out", ren.out, "Output directory")->required();
  render_cmd->add_option("--mode", ren.mode, "random or trajectory")->check(CLI::IsMember({"random", "trajectory"}));
  render_cmd->add_option("--traj", ren.trajectory, "Waypoint CSV (x,y,z,pitch,yaw in degrees)")
      ->check(CLI::ExistingFile);
  render_cmd->add_option("--views", ren.views, "Random-mode view count")->check(CLI::PositiveNumber);
  render_cmd->add_flag("--normalize", ren.normalize, "Normalize the mesh to the unit cube first");

  BackprojectArgs bp;
  auto* backproject_cmd = app.add_subcommand("backproject", "Depth images to a point cloud");
  backproject_cmd->add_option("--depth", bp.depth, "16-bit depth PNG (repeatable)")->required()->check(CLI::ExistingFile);
  backproject_cmd->add_option("--camera", bp.camera, "Camera sidecar JSON (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  backproject_cmd->add_option("-o,--out", bp.out, "Output PLY")->required();
  backproject_cmd->add_option("--points", bp.points, "Resample to exactly this many points")->check(CLI::PositiveNumber);

  CaptionArgs cap;
  auto* caption_cmd = app.add_subcommand("caption", "Caption a mesh from rendered views");
  caption_cmd->add_option("--mesh", cap.mesh, "Mesh file")->required()->check(CLI::ExistingFile);
  caption_cmd->add_option("--views", cap.views, "Views rendered for captioning")->check(CLI::PositiveNumber);
  caption_cmd->add_option("-o,--out", cap.out, "Write the caption here instead of stdout");

  BuildArgs bld;
  auto* build_cmd = app.add_subcommand("build", "Build a dataset from meshes or segmentation outputs");
  build_cmd->add_option("inputs", bld.inputs, "Mesh files, mesh directories or segment export directories")
      ->required()
      ->check(CLI::ExistingPath);
  BuildArgs imp;
  auto* import_cmd = app.add_subcommand("import", "Build a dataset from an external directory of meshes");
  import_cmd->add_option("models_dir", imp.models_dir, "Directory of .obj/.ply files")
      ->required()
      ->check(CLI::ExistingDirectory);
  for (auto [cmd, args] : {std::pair{build_cmd, &bld}, std::pair{import_cmd, &imp}}) {
    cmd->add_option("-o,--out", args->out, "Dataset root")->required();
    cmd->add_option("--views", args->views, "Views and partial clouds per model")->check(CLI::PositiveNumber);
    cmd->add_option("--points", args->points, "Points per cloud")->check(CLI::PositiveNumber);
    cmd->add_option("--split", args->split, "Train fraction");
    cmd->add_flag("--meshes-only", args->meshes_only, "Write normalized meshes and the manifest only");
  }

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Chamfer distance, precision, recall, F-score and AUC");
  evaluate_cmd->add_option("--pred", ev.pred, "Predicted cloud")->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--gt", ev.gt, "Ground truth cloud")->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--pairs", ev.pairs, "Pairing file (CSV or JSON)")->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--csv", ev.csv, "Also write the table to this CSV file");
  evaluate_cmd->add_option("--tau", ev.tau, "Distance threshold");
  evaluate_cmd->add_option("--auc-min", ev.auc_min, "Lower AUC threshold");
  evaluate_cmd->add_option("--auc-max", ev.auc_max, "Upper AUC threshold");
  evaluate_cmd->add_option("--auc-samples", ev.auc_samples, "Log-spaced AUC samples");
  evaluate_cmd->add_option("--l2-convention", ev.l2_convention, "literal-norm or squared");
  evaluate_cmd->add_flag("--json", ev.json_output, "Print JSON instead of CSV");

  ValidateArgs val;
  auto* validate_cmd = app.add_subcommand("validate", "Check a built dataset");
  validate_cmd->add_option("target", val.target, "Dataset root or manifest.json")->required()->check(CLI::ExistingPath);
  validate_cmd->add_flag("--json", val.json_output, "Print JSON");

  ServeArgs srv;
  auto* serve_cmd = app.add_subcommand("serve", "Run the segmentation HTTP service");
  serve_cmd->add_option("--scene-dir", srv.scene_dir, "Directory of scene meshes")->required();
  serve_cmd->add_option("--state-dir", srv.state_dir, "Journals and exports");
  serve_cmd->add_option("--host", srv.host, "Listen address");
  serve_cmd->add_option("--port", srv.port, "Listen port (0: any)");
  serve_cmd->add_option("--job-workers", srv.job_workers, "Background job threads");

  std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << e.what() << "\n\n" << sub->help();
    return kUsage;
  }

  try {
    common.load();
    if (segment->parsed()) return cmd_segment(common, seg);
    if (render_cmd->parsed()) return cmd_render(common, ren);
    if (backproject_cmd->parsed()) return cmd_backproject(common, bp);
    if (caption_cmd->parsed()) return cmd_caption(common, cap);
    if (build_cmd->parsed()) return cmd_build(common, bld);
    if (import_cmd->parsed()) return cmd_import(common, imp);
    if (evaluate_cmd->parsed()) return cmd_evaluate(common, ev);
    if (validate_cmd->parsed()) return cmd_validate(val);
    if (serve_cmd->parsed()) return cmd_serve(common, srv);
  } catch (const UsageError& e) {
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << "error: " << e.what() << "\n\n" << sub->help();
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPartialFailure;
  }
  return kUsage;
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace surfcomp::cli
