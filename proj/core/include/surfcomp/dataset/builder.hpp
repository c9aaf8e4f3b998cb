#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "surfcomp/providers/config.hpp"
#include "surfcomp/render/camera.hpp"

namespace surfcomp {

inline constexpr const char* kDatasetFormatVersion = "1.0";

struct GenerationParams {
  std::size_t views = 15;    ///< rendered views and partial clouds per model
  std::size_t points = 2048; ///< points per partial and GT cloud
  double split_ratio = 0.7;
  std::uint64_t seed = 0;
  bool meshes_only = false;  ///< emit mesh.ply and the manifest only
  std::size_t workers = 0;
  CameraIntrinsics intrinsics{};
};

enum class ModelProvenance { kSegmented, kImported };
enum class Split { kTrain, kTest };

const char* to_string(ModelProvenance p);
const char* to_string(Split s);

struct ModelInput {
  std::string id;
  std::filesystem::path mesh_path;
  ModelProvenance provenance = ModelProvenance::kSegmented;
};

/// Artifact paths are relative to the dataset root.
struct ModelEntry {
  std::string id;
  std::uint64_t seed = 0;
  std::string mesh_path;
  std::string caption_path;
  std::string gt_path;
  std::vector<std::string> rgb_paths;
  std::vector<std::string> depth_paths;
  std::vector<std::string> camera_paths;
  std::vector<std::string> partial_paths;
  Split split = Split::kTrain;
  ModelProvenance provenance = ModelProvenance::kSegmented;
};

struct BuildFailure {
  std::string id;
  std::string source;
  std::string error;
};

struct DatasetManifest {
  std::string version = kDatasetFormatVersion;
  std::vector<ModelEntry> models;  ///< sorted by id
  std::vector<BuildFailure> failures;
  GenerationParams params;
};

/// Expands build inputs: a mesh file becomes one model; a directory holding
/// segments.json contributes its accepted segments; any other directory
/// contributes its .obj/.ply files. Ids come from file stems (segment ids for
/// segmentation outputs), made filesystem-safe and unique.
std::vector<ModelInput> collect_build_inputs(const std::vector<std::filesystem::path>& paths,
                                             ModelProvenance provenance = ModelProvenance::kSegmented);

/// Builds every model under out_dir/{id}/ and writes out_dir/manifest.json
/// last via temp file and rename. A failing model is listed under failures
/// and the rest continue. Throws PreconditionError for an empty input list and
/// IoError when the manifest cannot be written.
DatasetManifest build_dataset(const std::vector<ModelInput>& inputs, const std::filesystem::path& out_dir,
                              const GenerationParams& params, const ProviderConfig& providers = {});

/// build_dataset over the mesh files of one directory with provenance
/// "imported". Throws PreconditionError when the directory holds no meshes.
DatasetManifest import_external(const std::filesystem::path& models_dir, const std::filesystem::path& out_dir,
                                const GenerationParams& params, const ProviderConfig& providers = {});

/// Train membership: models ranked by a seeded hash of their id; the first
/// round(ratio * N) (at least 1 when N >= 1) are train.
std::vector<Split> assign_splits(const std::vector<std::string>& ids, double ratio, std::uint64_t seed);

std::string manifest_to_string(const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct ValidationCheck {
  std::string name;      ///< e.g. "missing-path", "point-count"
  std::string model_id;  ///< empty for dataset-wide checks
  std::string path;
  bool passed = true;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool passed() const;
  std::vector<ValidationCheck> failures() const;
};

/// Re-checks a built dataset: array lengths, referenced files, point counts
/// of partial and GT clouds, depth PNG size against its camera sidecar, and the
/// train ratio. Throws IoError/ParseError when the manifest itself is unreadable.
ValidationReport validate_dataset(const std::filesystem::path& manifest_path);

}  // namespace surfcomp
