#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surfcomp/providers/config.hpp"
#include "surfcomp/render/camera.hpp"
#include "surfcomp/segmentation/slicer.hpp"

namespace surfcomp {

struct SegmentationParams {
  int bev_resolution = 512;
  double bev_margin = 0.05;
  int lattice = 32;           ///< auto mode: G x G point prompts
  double dedupe_iou = 0.8;    ///< auto mode: masks at or above this IoU merge (larger kept)
  int relevance_views = 4;
  double relevance_threshold = 0.5;
  std::string category = "building";
  CameraIntrinsics view_intrinsics{};
  std::uint64_t seed = 0;
  std::size_t workers = 0;  ///< 0: hardware concurrency
  SliceOptions slice{};
};

struct SegmentationResult {
  std::vector<SegmentRecord> segments;
  SliceReport report;
  LabelMask mask;
  BevRender bev;
};

/// BEV render used for segmentation: heights are measured from just below the
/// scene's lowest point, so the ground itself shows up as a low nonzero level.
BevRender segmentation_bev(const TriangleMesh& scene, const SegmentationParams& params);

/// Automatic mode: BEV, lattice point prompts over above-ground pixels (points
/// inside an already found region are skipped), IoU deduplication, slicing,
/// then relevance scoring on random-mode renders of each segment. Segments at
/// or above the threshold are accepted, the rest rejected; a segment whose
/// scoring failed stays pending.
SegmentationResult segment_scene_auto(const TriangleMesh& scene, const ProviderConfig& providers,
                                      const SegmentationParams& params = {});

/// Manual mode: mask from user prompts, then slicing. Records stay pending
/// for human review. Throws EmptyRegionError when the prompts select nothing.
SegmentationResult segment_scene_manual(const TriangleMesh& scene, const PromptSet& prompts,
                                        const ProviderConfig& providers,
                                        const SegmentationParams& params = {});

/// Manual mode on a BEV that was already rendered (the service caches it).
SegmentationResult segment_with_bev(const TriangleMesh& scene, const BevRender& bev, const PromptSet& prompts,
                                    const ProviderConfig& providers, const SegmentationParams& params = {});

/// Random-mode RGB renders of a segment used for scoring and previews.
std::vector<RgbImage> segment_views(const TriangleMesh& submesh, std::size_t count, std::uint64_t seed,
                                    const CameraIntrinsics& intrinsics);

/// Relevance scoring and threshold decision for one record.
void score_segment(SegmentRecord& record, const ProviderConfig& providers, const SegmentationParams& params);

}  // namespace surfcomp
