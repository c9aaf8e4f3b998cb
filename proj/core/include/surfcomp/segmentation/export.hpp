#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "surfcomp/segmentation/slicer.hpp"

namespace surfcomp {

/// Writes one binary PLY per segment ({id}.ply) plus segments.json, an array of
/// {id, label, triangle_count, relevance, status, provenance, mesh}. Returns
/// the written PLY paths.
std::vector<std::filesystem::path> export_segments(std::span<const SegmentRecord> segments,
                                                   const std::filesystem::path& dir, bool accepted_only);

struct ExportedSegment {
  std::string id;
  std::filesystem::path mesh_path;
  SegmentStatus status = SegmentStatus::kPending;
};

/// Reads a segments.json written by export_segments.
std::vector<ExportedSegment> read_segments_manifest(const std::filesystem::path& segments_json);

}  // namespace surfcomp
