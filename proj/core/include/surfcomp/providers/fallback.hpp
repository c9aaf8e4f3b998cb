#pragma once

#include "surfcomp/providers/prompts.hpp"
#include "surfcomp/render/image.hpp"

namespace surfcomp {

struct FallbackMaskParams {
  /// Region-grow tolerance as a fraction of the nonzero height range.
  double height_tolerance_fraction = 0.05;
  /// Percentile of nonzero heights treated as ground level.
  double ground_percentile = 5.0;
};

/// Model-free mask generation on a BEV height image.
///
/// Each foreground point grows a 4-connected region over above-ground pixels
/// whose height differs from the running region mean by less than the
/// tolerance. Each box takes every above-ground pixel whose center lies inside
/// it. Groups get labels in prompt order (points, then boxes); a pixel keeps
/// the first label that claims it. Background points carve their own
/// height-connected region out of every label. Point labels keep only the
/// component containing their seed, so they stay 4-connected.
///
/// Throws EmptyRegionError when a foreground point lands on ground or the
/// resulting mask is empty.
LabelMask fallback_mask(const DepthImage& height, const PromptSet& prompts,
                        const FallbackMaskParams& params = {});

/// Height at or below which a pixel counts as ground.
double ground_threshold(const DepthImage& height, const FallbackMaskParams& params = {});

}  // namespace surfcomp
