#include "surfcomp/segmentation/export.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "surfcomp/geometry/mesh_io.hpp"
#include "surfcomp/util/error.hpp"

namespace surfcomp {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<fs::path> export_segments(std::span<const SegmentRecord> segments, const fs::path& dir,
                                      bool accepted_only) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  json list = json::array();
  for (const SegmentRecord& s : segments) {
    if (accepted_only && s.status != SegmentStatus::kAccepted) continue;
    const fs::path mesh_path = dir / (s.id + ".ply");
    save_mesh(s.submesh, mesh_path);
    written.push_back(mesh_path);
    json entry{{"id", s.id},
               {"label", s.label},
               {"triangle_count", s.submesh.triangle_count()},
               {"status", to_string(s.status)},
               {"provenance", to_string(s.provenance)},
               {"mesh", mesh_path.filename().string()}};
    if (s.relevance) {
      entry["relevance"] = {{"score", s.relevance->score},
                            {"label", s.relevance->label},
                            {"provenance", s.relevance->provenance}};
    } else {
      entry["relevance"] = nullptr;
    }
    list.push_back(std::move(entry));
  }
  std::ofstream out(dir / "segments.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "segments.json").string());
  out << list.dump(2) << "\n";
  return written;
}

std::vector<ExportedSegment> read_segments_manifest(const fs::path& segments_json) {
  std::ifstream in(segments_json);
  if (!in) throw IoError("cannot open '" + segments_json.string() + "'");
  std::vector<ExportedSegment> out;
  try {
    const json list = json::parse(in);
    for (const auto& e : list) {
      ExportedSegment s;
      s.id = e.at("id").get<std::string>();
      s.mesh_path = segments_json.parent_path() / e.at("mesh").get<std::string>();
      s.status = segment_status_from_string(e.at("status").get<std::string>());
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("segments.json: ") + e.what(), 0, ParseError::Unit::kByteOffset);
  }
  return out;
}

}  // namespace surfcomp
