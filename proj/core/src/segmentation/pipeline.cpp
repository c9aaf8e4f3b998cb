#include "surfcomp/segmentation/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "surfcomp/providers/fallback.hpp"
#include "surfcomp/render/rasterizer.hpp"
#include "surfcomp/util/error.hpp"
#include "surfcomp/util/log.hpp"
#include "surfcomp/util/parallel.hpp"
#include "surfcomp/util/rng.hpp"

namespace surfcomp {

BevRender segmentation_bev(const TriangleMesh& scene, const SegmentationParams& params) {
  if (scene.empty()) throw PreconditionError("scene is empty");
  const Aabb box = scene.bounds();
  const double z_range = box.extent().z();
  const double lift = 0.05 * (z_range > 0.0 ? z_range : box.max_extent());
  BevOptions opts;
  opts.resolution = params.bev_resolution;
  opts.margin = params.bev_margin;
  opts.base_z = box.min.z() - lift;
  return render_bev(scene, opts);
}

std::vector<RgbImage> segment_views(const TriangleMesh& submesh, std::size_t count, std::uint64_t seed,
                                    const CameraIntrinsics& intrinsics) {
  std::vector<RgbImage> views;
  if (count == 0) return views;
  for (const CameraPose& pose : random_viewpoints(submesh.bounds(), count, seed)) {
    views.push_back(render(submesh, intrinsics, pose).rgb);
  }
  return views;
}

void score_segment(SegmentRecord& record, const ProviderConfig& providers, const SegmentationParams& params) {
  const auto views = segment_views(record.submesh, static_cast<std::size_t>(std::max(1, params.relevance_views)),
                                   derive_seed(params.seed, record.id), params.view_intrinsics);
  RelevanceScore score = score_relevance(providers, views, params.category);
  score.segment_id = record.id;
  record.relevance = score;
  record.decide(score.score >= params.relevance_threshold ? SegmentStatus::kAccepted : SegmentStatus::kRejected);
}

namespace {

using Region = std::vector<std::size_t>;  // sorted pixel indices

double iou(const Region& a, const Region& b) {
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else { ++inter; ++ia; ++ib; }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

SegmentationResult segment_scene_auto(const TriangleMesh& scene, const ProviderConfig& providers,
                                      const SegmentationParams& params) {
  if (scene.empty()) throw PreconditionError("scene is empty");
  if (params.lattice < 1) throw PreconditionError("lattice must be >= 1");
  SegmentationResult result;
  result.bev = segmentation_bev(scene, params);
  const BevRender& bev = result.bev;
  const int w = bev.frame.width;
  const int h = bev.frame.height;
  const double ground = ground_threshold(bev.height, providers.fallback_mask);

  std::vector<Region> regions;
  std::vector<char> covered(static_cast<std::size_t>(w) * h, 0);
  for (int j = 0; j < params.lattice; ++j) {
    for (int i = 0; i < params.lattice; ++i) {
      const double u = (i + 0.5) * w / params.lattice;
      const double v = (j + 0.5) * h / params.lattice;
      const int pu = static_cast<int>(u);
      const int pv = static_cast<int>(v);
      const std::size_t pidx = static_cast<std::size_t>(pv) * w + pu;
      if (!(bev.height.at(pu, pv) > ground) || covered[pidx]) continue;

      PromptSet prompt;
      prompt.points.push_back({u, v, Polarity::kForeground});
      LabelMask m;
      try {
        m = request_mask(providers, bev.rgb, bev.height, prompt);
      } catch (const EmptyRegionError&) {
        continue;
      }
      Region region;
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (m.data()[k] != 0) region.push_back(k);
      }
      if (region.empty()) continue;

      bool merged = false;
      for (Region& kept : regions) {
        if (iou(kept, region) >= params.dedupe_iou) {
          if (region.size() > kept.size()) kept = region;
          merged = true;
          break;
        }
      }
      if (!merged) regions.push_back(region);
      for (std::size_t k : region) covered[k] = 1;
    }
  }

  result.mask = LabelMask(w, h, 0);
  std::uint16_t next = 0;
  for (const Region& r : regions) {
    const std::uint16_t label = ++next;
    for (std::size_t k : r) {
      if (result.mask.data()[k] == 0) result.mask.data()[k] = label;
    }
  }
  result.mask = relabel_contiguous(result.mask);

  SliceResult sliced = slice_by_mask(scene, result.mask, bev.frame, params.slice, SegmentProvenance::kAutomatic);
  result.report = sliced.report;
  result.segments = std::move(sliced.segments);

  parallel_for(result.segments.size(), params.workers, [&](std::size_t k) {
    try {
      score_segment(result.segments[k], providers, params);
    } catch (const ProviderError& e) {
      logger()->warn("relevance scoring failed for {}: {}", result.segments[k].id, e.what());
    }
  });
  return result;
}

SegmentationResult segment_with_bev(const TriangleMesh& scene, const BevRender& bev, const PromptSet& prompts,
                                    const ProviderConfig& providers, const SegmentationParams& params) {
  SegmentationResult result;
  result.bev = bev;
  result.mask = request_mask(providers, bev.rgb, bev.height, prompts);
  SliceResult sliced = slice_by_mask(scene, result.mask, bev.frame, params.slice, SegmentProvenance::kManual);
  if (sliced.segments.empty()) throw EmptyRegionError("prompted mask covers no scene triangles");
  result.report = sliced.report;
  result.segments = std::move(sliced.segments);
  return result;
}

SegmentationResult segment_scene_manual(const TriangleMesh& scene, const PromptSet& prompts,
                                        const ProviderConfig& providers, const SegmentationParams& params) {
  return segment_with_bev(scene, segmentation_bev(scene, params), prompts, providers, params);
}

}  // namespace surfcomp
