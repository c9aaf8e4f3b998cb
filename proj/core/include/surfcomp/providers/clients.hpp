#pragma once

#include <span>
#include <string>
#include <vector>

#include "surfcomp/geometry/types.hpp"
#include "surfcomp/providers/config.hpp"
#include "surfcomp/providers/prompts.hpp"
#include "surfcomp/render/image.hpp"

namespace surfcomp {

struct RelevanceScore {
  std::string segment_id;
  double score = 1.0;  ///< in [0, 1]
  std::string label;
  /// "scored" when an external scorer produced the value, "unscored" for the
  /// pass-through fallback.
  std::string provenance = "unscored";
};

struct Caption {
  std::string text;
  std::size_t source_view_count = 0;
};

/// Prompt-based mask for a BEV render. Prompts are validated before any
/// network traffic. With a mask endpoint configured the request goes over the
/// wire (POST {endpoint}/v1/mask); otherwise the fallback grows regions on
/// `height`. Result labels are contiguous with at least one nonzero label.
///
/// Errors: PreconditionError, ProviderTimeoutError (transport, retried),
/// ProviderProtocolError (bad status or payload, not retried),
/// EmptyRegionError.
LabelMask request_mask(const ProviderConfig& config, const RgbImage& image,
                       const DepthImage& height, const PromptSet& prompts);

/// Mean relevance of `views` to `category`. Without a score endpoint the
/// fallback returns 1.0 with provenance "unscored".
RelevanceScore score_relevance(const ProviderConfig& config, std::span<const RgbImage> views,
                               const std::string& category);

/// One caption per view, then the modal caption (ties: longest, then
/// lexicographically smallest). Without a caption endpoint the fallback
/// describes `bounds`.
Caption caption_segment(const ProviderConfig& config, std::span<const RgbImage> views,
                        const Aabb& bounds);

/// Modal selection used by caption_segment. Throws PreconditionError when empty.
std::string select_caption(std::span<const std::string> captions);

/// "a 3D scene segment, footprint {W}m × {L}m, height {H}m" with one decimal.
std::string template_caption(const Aabb& bounds);

}  // namespace surfcomp
