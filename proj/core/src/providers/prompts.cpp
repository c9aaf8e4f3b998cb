#include "surfcomp/providers/prompts.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "surfcomp/util/error.hpp"

namespace surfcomp {

namespace {
void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw PreconditionError(field + ": " + why);
}
}  // namespace

void PromptSet::validate(int width, int height) const {
  if (points.empty() && boxes.empty()) throw PreconditionError("prompts: at least one point or box is required");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const std::string base = "points[" + std::to_string(i) + "]";
    require(std::isfinite(p.u) && p.u >= 0 && p.u < width, base + ".u", "outside image width " + std::to_string(width));
    require(std::isfinite(p.v) && p.v >= 0 && p.v < height, base + ".v", "outside image height " + std::to_string(height));
  }
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const std::string base = "boxes[" + std::to_string(i) + "]";
    require(std::isfinite(b.u_min) && b.u_min >= 0 && b.u_min <= width, base + ".u_min", "outside image");
    require(std::isfinite(b.u_max) && b.u_max >= 0 && b.u_max <= width, base + ".u_max", "outside image");
    require(std::isfinite(b.v_min) && b.v_min >= 0 && b.v_min <= height, base + ".v_min", "outside image");
    require(std::isfinite(b.v_max) && b.v_max >= 0 && b.v_max <= height, base + ".v_max", "outside image");
    require(b.u_min < b.u_max, base + ".u_max", "must exceed u_min");
    require(b.v_min < b.v_max, base + ".v_max", "must exceed v_min");
  }
}

std::uint16_t max_label(const LabelMask& mask) {
  std::uint16_t m = 0;
  for (auto l : mask.data()) m = std::max(m, l);
  return m;
}

bool labels_contiguous(const LabelMask& mask) {
  std::vector<bool> seen(static_cast<std::size_t>(max_label(mask)) + 1, false);
  for (auto l : mask.data()) seen[l] = true;
  return std::all_of(seen.begin() + 1, seen.end(), [](bool b) { return b; });
}

LabelMask relabel_contiguous(const LabelMask& mask) {
  std::array<std::uint16_t, 65536> remap{};
  std::vector<bool> seen(65536, false);
  for (auto l : mask.data()) seen[l] = true;
  std::uint16_t next = 0;
  for (std::size_t l = 1; l < seen.size(); ++l) {
    if (seen[l]) remap[l] = ++next;
  }
  LabelMask out(mask.width(), mask.height(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) out.data()[i] = remap[mask.data()[i]];
  return out;
}

}  // namespace surfcomp
