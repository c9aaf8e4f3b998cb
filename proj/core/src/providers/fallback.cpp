#include "surfcomp/providers/fallback.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "surfcomp/util/error.hpp"

namespace surfcomp {

namespace {

struct HeightStats {
  double ground = 0.0;     ///< pixels must be strictly above this
  double tolerance = 0.0;  ///< region-grow height tolerance
  bool any = false;
};

HeightStats height_stats(const DepthImage& height, const FallbackMaskParams& params) {
  std::vector<double> nonzero;
  for (double h : height.data()) {
    if (h > 0.0 && std::isfinite(h)) nonzero.push_back(h);
  }
  HeightStats s;
  if (nonzero.empty()) return s;
  s.any = true;
  std::sort(nonzero.begin(), nonzero.end());
  const double p = std::clamp(params.ground_percentile, 0.0, 100.0);
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * nonzero.size()));
  s.ground = nonzero[rank == 0 ? 0 : rank - 1];
  // A scene with a single height level has no ground to separate from.
  if (s.ground >= nonzero.back()) s.ground = 0.0;
  const double range = nonzero.back() - nonzero.front();
  // Strict "< tolerance" needs a positive tolerance for flat roofs.
  s.tolerance = std::max(params.height_tolerance_fraction * range, 1e-9 * nonzero.back());
  return s;
}

/// 4-connected region grow from (su, sv); `admit` gates membership.
template <typename Admit>
std::vector<std::size_t> grow(const DepthImage& height, int su, int sv, double tolerance, Admit&& admit) {
  const int w = height.width();
  const int h = height.height();
  std::vector<char> visited(height.size(), 0);
  std::vector<std::size_t> region;
  std::deque<std::pair<int, int>> queue;
  auto idx = [w](int u, int v) { return static_cast<std::size_t>(v) * w + u; };

  double sum = height.at(su, sv);
  region.push_back(idx(su, sv));
  visited[idx(su, sv)] = 1;
  queue.emplace_back(su, sv);
  constexpr int kDu[4] = {1, -1, 0, 0};
  constexpr int kDv[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    auto [u, v] = queue.front();
    queue.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int nu = u + kDu[k];
      const int nv = v + kDv[k];
      if (nu < 0 || nv < 0 || nu >= w || nv >= h) continue;
      const std::size_t n = idx(nu, nv);
      if (visited[n]) continue;
      const double hn = height.at(nu, nv);
      const double mean = sum / static_cast<double>(region.size());
      if (!admit(hn) || !(std::abs(hn - mean) < tolerance)) continue;
      visited[n] = 1;
      sum += hn;
      region.push_back(n);
      queue.emplace_back(nu, nv);
    }
  }
  return region;
}

/// Keeps only the 4-connected component of `label` containing `seed`.
void keep_seed_component(LabelMask& mask, std::uint16_t label, std::size_t seed) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<char> keep(mask.size(), 0);
  if (mask.data()[seed] == label) {
    std::deque<std::size_t> queue{seed};
    keep[seed] = 1;
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      const int u = static_cast<int>(i % w);
      const int v = static_cast<int>(i / w);
      const std::pair<int, int> nbrs[4] = {{u + 1, v}, {u - 1, v}, {u, v + 1}, {u, v - 1}};
      for (auto [nu, nv] : nbrs) {
        if (nu < 0 || nv < 0 || nu >= w || nv >= h) continue;
        const std::size_t n = static_cast<std::size_t>(nv) * w + nu;
        if (!keep[n] && mask.data()[n] == label) {
          keep[n] = 1;
          queue.push_back(n);
        }
      }
    }
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.data()[i] == label && !keep[i]) mask.data()[i] = 0;
  }
}

}  // namespace

double ground_threshold(const DepthImage& height, const FallbackMaskParams& params) {
  return height_stats(height, params).ground;
}

LabelMask fallback_mask(const DepthImage& height, const PromptSet& prompts, const FallbackMaskParams& params) {
  prompts.validate(height.width(), height.height());
  const HeightStats stats = height_stats(height, params);
  auto above = [&](double h) { return stats.any && h > stats.ground && std::isfinite(h); };

  LabelMask mask(height.width(), height.height(), 0);
  std::uint16_t next = 0;
  std::vector<std::pair<std::uint16_t, std::size_t>> point_seeds;

  auto claim = [&](const std::vector<std::size_t>& pixels, std::uint16_t label) {
    for (std::size_t i : pixels) {
      if (mask.data()[i] == 0) mask.data()[i] = label;
    }
  };

  for (std::size_t k = 0; k < prompts.points.size(); ++k) {
    const PointPrompt& p = prompts.points[k];
    if (p.polarity != Polarity::kForeground) continue;
    const int u = static_cast<int>(std::floor(p.u));
    const int v = static_cast<int>(std::floor(p.v));
    if (!above(height.at(u, v))) {
      throw EmptyRegionError("points[" + std::to_string(k) + "] lands on background or ground");
    }
    const std::uint16_t label = ++next;
    claim(grow(height, u, v, stats.tolerance, above), label);
    point_seeds.emplace_back(label, static_cast<std::size_t>(v) * height.width() + u);
  }

  for (const BoxPrompt& b : prompts.boxes) {
    const std::uint16_t label = ++next;
    std::vector<std::size_t> pixels;
    for (int v = 0; v < height.height(); ++v) {
      const double cy = v + 0.5;
      if (cy < b.v_min || cy > b.v_max) continue;
      for (int u = 0; u < height.width(); ++u) {
        const double cx = u + 0.5;
        if (cx < b.u_min || cx > b.u_max) continue;
        if (above(height.at(u, v))) pixels.push_back(static_cast<std::size_t>(v) * height.width() + u);
      }
    }
    claim(pixels, label);
  }

  for (const PointPrompt& p : prompts.points) {
    if (p.polarity != Polarity::kBackground) continue;
    const int u = static_cast<int>(std::floor(p.u));
    const int v = static_cast<int>(std::floor(p.v));
    const auto carved = grow(height, u, v, stats.tolerance, [](double) { return true; });
    for (std::size_t i : carved) mask.data()[i] = 0;
  }

  for (auto [label, seed] : point_seeds) keep_seed_component(mask, label, seed);

  LabelMask out = relabel_contiguous(mask);
  if (max_label(out) == 0) throw EmptyRegionError("prompts selected no above-ground pixels");
  return out;
}

}  // namespace surfcomp
