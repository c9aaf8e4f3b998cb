#include "surfcomp/providers/clients.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "surfcomp/providers/fallback.hpp"
#include "surfcomp/render/image_io.hpp"
#include "surfcomp/util/base64.hpp"
#include "surfcomp/util/error.hpp"
#include "surfcomp/util/log.hpp"

namespace surfcomp {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  ///< scheme://host:port
  std::string prefix;  ///< path prefix without trailing slash
};

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw PreconditionError("provider endpoint needs a scheme: '" + url + "'");
  const auto path = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, path);
  e.prefix = path == std::string::npos ? "" : url.substr(path);
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

/// Bounds concurrent requests per endpoint origin.
class InflightLimiter {
 public:
  static InflightLimiter& instance() {
    static InflightLimiter limiter;
    return limiter;
  }

  std::shared_ptr<std::counting_semaphore<>> slot(const std::string& key, int max_inflight) {
    std::lock_guard lock(mutex_);
    auto& s = slots_[key + "#" + std::to_string(max_inflight)];
    if (!s) s = std::make_shared<std::counting_semaphore<>>(std::max(1, max_inflight));
    return s;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<std::counting_semaphore<>>> slots_;
};

/// POSTs JSON, retrying transport failures with exponential backoff.
json post_json(const ProviderConfig& config, const std::string& base, const std::string& route,
               const json& body) {
  const Endpoint ep = parse_endpoint(base);
  auto sem = InflightLimiter::instance().slot(ep.origin, config.max_inflight);
  const std::string payload = body.dump();
  const auto timeout = std::chrono::milliseconds(std::max(1, config.timeout_ms));
  const int attempts = std::max(1, config.max_attempts);

  for (int attempt = 1;; ++attempt) {
    httplib::Result res = [&] {
      sem->acquire();
      httplib::Client client(ep.origin);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      auto r = client.Post(ep.prefix + route, payload, "application/json");
      sem->release();
      return r;
    }();

    if (!res) {
      const std::string why = httplib::to_string(res.error());
      if (attempt >= attempts) {
        throw ProviderTimeoutError(fmt::format("{}{}: {} after {} attempts", ep.origin, route, why, attempt));
      }
      const auto backoff = std::chrono::milliseconds(
          static_cast<long long>(config.backoff_base_ms) << (attempt - 1));
      logger()->warn("{}{}: {}; retrying in {} ms", ep.origin, route, why, backoff.count());
      std::this_thread::sleep_for(backoff);
      continue;
    }
    if (res->status != 200) {
      throw ProviderProtocolError(fmt::format("{}{}: HTTP status {}", ep.origin, route, res->status));
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw ProviderProtocolError(fmt::format("{}{}: response is not JSON ({})", ep.origin, route, e.what()));
    }
  }
}

std::string png_base64(const RgbImage& image) { return base64_encode(encode_png(image)); }

[[noreturn]] void protocol_error(const std::string& route, const std::string& what) {
  throw ProviderProtocolError(route + ": " + what);
}

}  // namespace

LabelMask request_mask(const ProviderConfig& config, const RgbImage& image, const DepthImage& height,
                       const PromptSet& prompts) {
  prompts.validate(image.width(), image.height());
  if (config.mask_endpoint.empty()) {
    if (!config.fallback_enabled) throw ProviderError("no mask endpoint configured and fallback disabled");
    if (height.width() != image.width() || height.height() != image.height()) {
      throw PreconditionError("height image does not match the BEV image");
    }
    return fallback_mask(height, prompts, config.fallback_mask);
  }

  json body;
  body["image"] = png_base64(image);
  body["points"] = json::array();
  for (const auto& p : prompts.points) {
    body["points"].push_back(
        {{"u", p.u}, {"v", p.v}, {"polarity", p.polarity == Polarity::kForeground ? "foreground" : "background"}});
  }
  body["boxes"] = json::array();
  for (const auto& b : prompts.boxes) {
    body["boxes"].push_back({{"u_min", b.u_min}, {"v_min", b.v_min}, {"u_max", b.u_max}, {"v_max", b.v_max}});
  }
  const json reply = post_json(config, config.mask_endpoint, "/v1/mask", body);
  if (!reply.is_object() || !reply.contains("mask") || !reply["mask"].is_string()) {
    protocol_error("/v1/mask", "response lacks a 'mask' string");
  }
  LabelMask mask;
  try {
    mask = decode_png_gray16(base64_decode(reply["mask"].get<std::string>()));
  } catch (const Error& e) {
    protocol_error("/v1/mask", std::string("undecodable mask: ") + e.what());
  }
  if (mask.width() != image.width() || mask.height() != image.height()) {
    protocol_error("/v1/mask", fmt::format("mask is {}x{}, image is {}x{}", mask.width(), mask.height(),
                                           image.width(), image.height()));
  }
  mask = relabel_contiguous(mask);
  if (max_label(mask) == 0) throw EmptyRegionError("mask provider returned an empty mask");
  return mask;
}

RelevanceScore score_relevance(const ProviderConfig& config, std::span<const RgbImage> views,
                               const std::string& category) {
  if (views.empty()) throw PreconditionError("score_relevance needs at least one view");
  RelevanceScore out;
  out.label = category;
  if (config.score_endpoint.empty()) {
    if (!config.fallback_enabled) throw ProviderError("no score endpoint configured and fallback disabled");
    out.score = 1.0;
    out.provenance = "unscored";
    return out;
  }
  json body;
  body["images"] = json::array();
  for (const auto& v : views) body["images"].push_back(png_base64(v));
  body["labels"] = json::array({category});
  const json reply = post_json(config, config.score_endpoint, "/v1/score", body);
  if (!reply.is_object() || !reply.contains("scores") || !reply["scores"].is_array() ||
      reply["scores"].size() != views.size()) {
    protocol_error("/v1/score", "expected one score row per image");
  }
  double sum = 0.0;
  for (const auto& row : reply["scores"]) {
    if (!row.is_array() || row.size() != 1 || !row[0].is_number()) {
      protocol_error("/v1/score", "expected one score per label");
    }
    const double s = row[0].get<double>();
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) protocol_error("/v1/score", "score outside [0, 1]");
    sum += s;
  }
  out.score = sum / static_cast<double>(views.size());
  out.provenance = "scored";
  return out;
}

std::string select_caption(std::span<const std::string> captions) {
  if (captions.empty()) throw PreconditionError("no captions to select from");
  std::map<std::string, std::size_t> counts;
  for (const auto& c : captions) ++counts[c];
  const std::string* best = nullptr;
  std::size_t best_count = 0;
  // std::map iterates lexicographically, so strict comparisons keep the
  // smallest string among full ties.
  for (const auto& [text, count] : counts) {
    if (!best || count > best_count || (count == best_count && text.size() > best->size())) {
      best = &text;
      best_count = count;
    }
  }
  return *best;
}

std::string template_caption(const Aabb& bounds) {
  const Vec3 e = bounds.extent();
  return fmt::format("a 3D scene segment, footprint {:.1f}m × {:.1f}m, height {:.1f}m", e.x(), e.y(), e.z());
}

Caption caption_segment(const ProviderConfig& config, std::span<const RgbImage> views, const Aabb& bounds) {
  if (views.empty()) throw PreconditionError("caption_segment needs at least one view");
  if (config.caption_endpoint.empty()) {
    if (!config.fallback_enabled) throw ProviderError("no caption endpoint configured and fallback disabled");
    return {template_caption(bounds), views.size()};
  }
  std::vector<std::string> captions;
  captions.reserve(views.size());
  for (const auto& v : views) {
    const json reply = post_json(config, config.caption_endpoint, "/v1/caption", json{{"image", png_base64(v)}});
    if (!reply.is_object() || !reply.contains("caption") || !reply["caption"].is_string()) {
      protocol_error("/v1/caption", "response lacks a 'caption' string");
    }
    auto text = reply["caption"].get<std::string>();
    if (text.empty()) protocol_error("/v1/caption", "empty caption");
    captions.push_back(std::move(text));
  }
  return {select_caption(captions), views.size()};
}

}  // namespace surfcomp
