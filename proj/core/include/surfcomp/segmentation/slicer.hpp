#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "surfcomp/geometry/types.hpp"
#include "surfcomp/providers/clients.hpp"
#include "surfcomp/providers/prompts.hpp"
#include "surfcomp/render/bev.hpp"

namespace surfcomp {

enum class SegmentStatus { kPending, kAccepted, kRejected };
enum class SegmentProvenance { kManual, kAutomatic };

const char* to_string(SegmentStatus s);
const char* to_string(SegmentProvenance p);
SegmentStatus segment_status_from_string(const std::string& s);

struct SegmentRecord {
  std::string id;
  std::uint16_t label = 0;
  TriangleMesh submesh;
  std::optional<RelevanceScore> relevance;
  SegmentStatus status = SegmentStatus::kPending;
  SegmentProvenance provenance = SegmentProvenance::kAutomatic;

  /// Moves a pending record to accepted/rejected. Repeating the current
  /// decision is a no-op returning false; any other transition throws
  /// PreconditionError.
  bool decide(SegmentStatus decision);
};

struct SliceReport {
  std::map<std::uint16_t, std::size_t> per_label;  ///< post-split triangles per label
  std::size_t unassigned = 0;
  std::size_t boundary_split = 0;  ///< source triangles that were cut

  std::size_t total() const;
};

struct SliceOptions {
  /// A point whose own pixel is background takes the label of a labeled pixel
  /// within this many pixels (nearest wins). Absorbs the half-pixel gap
  /// between a rasterized footprint and the geometry that produced it.
  double snap_pixels = 1.0;
  int max_split_depth = 4;
  std::string id_prefix = "seg";
};

struct SliceResult {
  std::vector<SegmentRecord> segments;  ///< ascending label order
  SliceReport report;
  TriangleMesh unassigned;  ///< label-0 triangles (may be empty)
};

/// Assigns each scene triangle to the mask label under its centroid's BEV
/// projection. Triangles whose vertices see different labels are first cut
/// along the label boundary (vertical planes through the boundary crossing
/// points of the edges), recursively up to max_split_depth. Each nonzero label
/// with triangles yields one record with compacted vertices; records come out
/// pending with provenance `provenance`.
///
/// Throws PreconditionError when the mask does not match the frame. An
/// all-zero mask yields no segments and logs a warning.
SliceResult slice_by_mask(const TriangleMesh& scene, const LabelMask& mask, const BevFrame& frame,
                          const SliceOptions& options = {},
                          SegmentProvenance provenance = SegmentProvenance::kAutomatic);

}  // namespace surfcomp
