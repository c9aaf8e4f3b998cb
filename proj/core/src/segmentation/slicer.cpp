#include "surfcomp/segmentation/slicer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include "surfcomp/util/error.hpp"
#include "surfcomp/util/log.hpp"

namespace surfcomp {

const char* to_string(SegmentStatus s) {
  switch (s) {
    case SegmentStatus::kPending: return "pending";
    case SegmentStatus::kAccepted: return "accepted";
    case SegmentStatus::kRejected: return "rejected";
  }
  return "pending";
}

const char* to_string(SegmentProvenance p) {
  return p == SegmentProvenance::kManual ? "manual" : "automatic";
}

SegmentStatus segment_status_from_string(const std::string& s) {
  if (s == "pending") return SegmentStatus::kPending;
  if (s == "accepted" || s == "accept") return SegmentStatus::kAccepted;
  if (s == "rejected" || s == "reject") return SegmentStatus::kRejected;
  throw PreconditionError("unknown segment status '" + s + "'");
}

bool SegmentRecord::decide(SegmentStatus decision) {
  if (decision == SegmentStatus::kPending) throw PreconditionError("cannot move a segment back to pending");
  if (status == decision) return false;
  if (status != SegmentStatus::kPending) {
    throw PreconditionError(std::string("segment ") + id + " is already " + to_string(status));
  }
  status = decision;
  return true;
}

std::size_t SliceReport::total() const {
  std::size_t n = unassigned;
  for (const auto& [label, count] : per_label) n += count;
  return n;
}

namespace {

struct WorkVertex {
  Vec3 pos;
  Vec3 color;
  std::int64_t source = -1;  ///< original vertex index, -1 for cut points
};

struct WorkTriangle {
  WorkVertex v[3];
};

class Slicer {
 public:
  Slicer(const LabelMask& mask, const BevFrame& frame, const SliceOptions& options)
      : mask_(mask), frame_(frame), options_(options) {}

  std::uint16_t label_at(const Vec3& p) const {
    const Vec2 px = frame_.to_pixel(p.x(), p.y());
    const int i = static_cast<int>(std::floor(px.x()));
    const int j = static_cast<int>(std::floor(px.y()));
    if (mask_.contains(i, j) && mask_.at(i, j) != 0) return mask_.at(i, j);
    if (!(options_.snap_pixels > 0.0)) return 0;

    const int reach = static_cast<int>(std::ceil(options_.snap_pixels));
    double best = std::numeric_limits<double>::infinity();
    std::uint16_t label = 0;
    for (int dj = -reach; dj <= reach; ++dj) {
      for (int di = -reach; di <= reach; ++di) {
        const int ni = i + di;
        const int nj = j + dj;
        if (!mask_.contains(ni, nj)) continue;
        const std::uint16_t l = mask_.at(ni, nj);
        if (l == 0) continue;
        const double dx = std::max({ni - px.x(), 0.0, px.x() - (ni + 1)});
        const double dy = std::max({nj - px.y(), 0.0, px.y() - (nj + 1)});
        const double d = std::hypot(dx, dy);
        if (d > options_.snap_pixels) continue;
        if (d < best || (d == best && l < label)) {
          best = d;
          label = l;
        }
      }
    }
    return label;
  }

  /// Emits pieces of `t` with their labels into `out`. Returns true if cut.
  bool process(const WorkTriangle& t, int depth, std::vector<std::pair<WorkTriangle, std::uint16_t>>& out) const {
    const std::uint16_t l[3] = {label_at(t.v[0].pos), label_at(t.v[1].pos), label_at(t.v[2].pos)};
    const double area = triangle_area(t.v[0].pos, t.v[1].pos, t.v[2].pos);
    if ((l[0] == l[1] && l[1] == l[2]) || depth >= options_.max_split_depth || !(area > 0.0)) {
      out.emplace_back(t, centroid_label(t));
      return false;
    }
    // Apex: the vertex whose label is unique (vertex 0 when all differ).
    int a = 0;
    if (l[0] == l[1]) a = 2;
    else if (l[0] == l[2]) a = 1;
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    const double tb = crossing(t.v[a].pos, t.v[b].pos, l[a]);
    const double tc = crossing(t.v[a].pos, t.v[c].pos, l[a]);
    constexpr double kEps = 1e-9;
    if (!(tb > kEps && tb < 1 - kEps && tc > kEps && tc < 1 - kEps)) {
      out.emplace_back(t, centroid_label(t));
      return false;
    }
    const WorkVertex p = lerp(t.v[a], t.v[b], tb);
    const WorkVertex q = lerp(t.v[a], t.v[c], tc);
    const WorkTriangle pieces[3] = {{{t.v[a], p, q}}, {{p, t.v[b], t.v[c]}}, {{p, t.v[c], q}}};
    for (const WorkTriangle& piece : pieces) {
      if (triangle_area(piece.v[0].pos, piece.v[1].pos, piece.v[2].pos) > 0.0) process(piece, depth + 1, out);
    }
    return true;
  }

 private:
  std::uint16_t centroid_label(const WorkTriangle& t) const {
    return label_at((t.v[0].pos + t.v[1].pos + t.v[2].pos) / 3.0);
  }

  static WorkVertex lerp(const WorkVertex& a, const WorkVertex& b, double s) {
    return {a.pos + s * (b.pos - a.pos), a.color + s * (b.color - a.color), -1};
  }

  /// Parameter along a->b where the label stops being `la` (bisection).
  double crossing(const Vec3& a, const Vec3& b, std::uint16_t la) const {
    double lo = 0.0;
    double hi = 1.0;
    if (label_at(b) == la) return -1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (label_at(a + mid * (b - a)) == la) lo = mid;
      else hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  const LabelMask& mask_;
  const BevFrame& frame_;
  const SliceOptions& options_;
};

/// Builds a compacted mesh; original vertices dedupe by index, cut points by
/// exact coordinates.
class MeshAssembler {
 public:
  explicit MeshAssembler(bool colors) : colors_(colors) {}

  void add(const WorkTriangle& t) {
    Triangle tri;
    for (int k = 0; k < 3; ++k) tri[k] = vertex(t.v[k]);
    triangles_.push_back(tri);
  }

  TriangleMesh build() {
    return TriangleMesh(std::move(vertices_), std::move(triangles_),
                        colors_ ? std::move(colors_out_) : std::vector<Vec3>{});
  }

  bool empty() const { return triangles_.empty(); }

 private:
  struct Key {
    std::int64_t source;
    double x, y, z;
    bool operator==(const Key& o) const {
      return source == o.source && std::memcmp(&x, &o.x, sizeof(double) * 3) == 0;
    }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = std::hash<std::int64_t>()(k.source);
      for (double d : {k.x, k.y, k.z}) h = h * 1000003u ^ std::hash<double>()(d);
      return h;
    }
  };

  std::uint32_t vertex(const WorkVertex& v) {
    Key key = v.source >= 0 ? Key{v.source, 0, 0, 0} : Key{-1, v.pos.x(), v.pos.y(), v.pos.z()};
    auto [it, inserted] = ids_.try_emplace(key, static_cast<std::uint32_t>(vertices_.size()));
    if (inserted) {
      vertices_.push_back(v.pos);
      colors_out_.push_back(v.color);
    }
    return it->second;
  }

  bool colors_;
  std::vector<Vec3> vertices_;
  std::vector<Vec3> colors_out_;
  std::vector<Triangle> triangles_;
  std::unordered_map<Key, std::uint32_t, KeyHash> ids_;
};

}  // namespace

SliceResult slice_by_mask(const TriangleMesh& scene, const LabelMask& mask, const BevFrame& frame,
                          const SliceOptions& options, SegmentProvenance provenance) {
  if (mask.width() != frame.width || mask.height() != frame.height) {
    throw PreconditionError("mask dimensions do not match the BEV frame");
  }
  SliceResult result;
  if (max_label(mask) == 0) {
    logger()->warn("slice_by_mask: mask has no labels; nothing to slice");
    result.report.unassigned = scene.triangle_count();
    if (!scene.empty()) result.unassigned = scene;
    return result;
  }

  const Slicer slicer(mask, frame, options);
  const bool colors = scene.has_colors();
  std::map<std::uint16_t, MeshAssembler> per_label;
  MeshAssembler unassigned(colors);
  std::vector<std::pair<WorkTriangle, std::uint16_t>> pieces;

  const auto& verts = scene.vertices();
  for (const Triangle& tri : scene.triangles()) {
    WorkTriangle t;
    for (int k = 0; k < 3; ++k) {
      t.v[k] = {verts[tri[k]], colors ? scene.vertex_colors()[tri[k]] : Vec3::Zero(),
                static_cast<std::int64_t>(tri[k])};
    }
    pieces.clear();
    if (slicer.process(t, 0, pieces)) ++result.report.boundary_split;
    for (const auto& [piece, label] : pieces) {
      if (label == 0) {
        unassigned.add(piece);
        ++result.report.unassigned;
      } else {
        per_label.try_emplace(label, colors).first->second.add(piece);
        ++result.report.per_label[label];
      }
    }
  }

  for (auto& [label, assembler] : per_label) {
    SegmentRecord rec;
    rec.id = options.id_prefix + "-" + std::to_string(label);
    rec.label = label;
    rec.submesh = assembler.build();
    rec.provenance = provenance;
    result.segments.push_back(std::move(rec));
  }
  if (!unassigned.empty()) result.unassigned = unassigned.build();
  return result;
}

}  // namespace surfcomp
