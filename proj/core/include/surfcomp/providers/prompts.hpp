#pragma once

#include <cstdint>
#include <vector>

#include "surfcomp/render/image.hpp"

namespace surfcomp {

enum class Polarity { kForeground, kBackground };

/// Pixel-space point prompt; (u, v) may be fractional and selects pixel
/// (floor(u), floor(v)).
struct PointPrompt {
  double u = 0;
  double v = 0;
  Polarity polarity = Polarity::kForeground;
};

/// Pixel-space rectangle; selects pixels whose centers fall inside.
struct BoxPrompt {
  double u_min = 0, v_min = 0, u_max = 0, v_max = 0;
};

struct PromptSet {
  std::vector<PointPrompt> points;
  std::vector<BoxPrompt> boxes;

  /// Throws PreconditionError naming the offending field, e.g. "points[2].u".
  void validate(int width, int height) const;
};

/// Per-pixel segment label; 0 is background.
using LabelMask = Image<std::uint16_t>;

std::uint16_t max_label(const LabelMask& mask);
/// True when the labels present are exactly {0, 1, ..., K}.
bool labels_contiguous(const LabelMask& mask);
/// Renumbers the distinct nonzero labels to 1..K, preserving their order.
LabelMask relabel_contiguous(const LabelMask& mask);

}  // namespace surfcomp
