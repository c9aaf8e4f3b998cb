#include "surfcomp/providers/config.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "surfcomp/util/error.hpp"

namespace surfcomp {

namespace {

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return (v && *v) ? v : nullptr;
}

int env_int(const char* name, int fallback) {
  const char* v = env(name);
  if (!v) return fallback;
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw PreconditionError(std::string(name) + " is not an integer");
  }
}

}  // namespace

void apply_provider_env(ProviderConfig& c) {
  if (const char* v = env("SURFCOMP_MASK_URL")) c.mask_endpoint = v;
  if (const char* v = env("SURFCOMP_SCORE_URL")) c.score_endpoint = v;
  if (const char* v = env("SURFCOMP_CAPTION_URL")) c.caption_endpoint = v;
  c.timeout_ms = env_int("SURFCOMP_PROVIDER_TIMEOUT_MS", c.timeout_ms);
  c.max_inflight = env_int("SURFCOMP_PROVIDER_MAX_INFLIGHT", c.max_inflight);
  if (const char* v = env("SURFCOMP_PROVIDER_FALLBACK")) c.fallback_enabled = std::string(v) != "0";
}

ProviderConfig load_provider_config(const std::optional<std::filesystem::path>& file) {
  ProviderConfig c;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw IoError("cannot open provider config '" + file->string() + "'");
    try {
      const auto j = nlohmann::json::parse(in);
      const auto& p = j.contains("providers") ? j.at("providers") : j;
      c.mask_endpoint = p.value("mask_endpoint", c.mask_endpoint);
      c.score_endpoint = p.value("score_endpoint", c.score_endpoint);
      c.caption_endpoint = p.value("caption_endpoint", c.caption_endpoint);
      c.timeout_ms = p.value("timeout_ms", c.timeout_ms);
      c.max_inflight = p.value("max_inflight", c.max_inflight);
      c.fallback_enabled = p.value("fallback_enabled", c.fallback_enabled);
      c.max_attempts = p.value("max_attempts", c.max_attempts);
      c.backoff_base_ms = p.value("backoff_base_ms", c.backoff_base_ms);
      if (p.contains("fallback_mask")) {
        const auto& f = p.at("fallback_mask");
        c.fallback_mask.height_tolerance_fraction =
            f.value("height_tolerance_fraction", c.fallback_mask.height_tolerance_fraction);
        c.fallback_mask.ground_percentile = f.value("ground_percentile", c.fallback_mask.ground_percentile);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("provider config: ") + e.what(), 0, ParseError::Unit::kByteOffset);
    }
  }
  apply_provider_env(c);
  if (c.timeout_ms < 1) throw PreconditionError("timeout_ms must be >= 1");
  if (c.max_inflight < 1) throw PreconditionError("max_inflight must be >= 1");
  return c;
}

}  // namespace surfcomp
