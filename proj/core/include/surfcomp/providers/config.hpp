#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "surfcomp/providers/fallback.hpp"

namespace surfcomp {

/// Endpoints are base URLs ("http://host:port[/prefix]"); an empty endpoint
/// means "use the built-in fallback".
struct ProviderConfig {
  std::string mask_endpoint;
  std::string score_endpoint;
  std::string caption_endpoint;
  int timeout_ms = 10000;
  int max_inflight = 4;
  bool fallback_enabled = true;
  int max_attempts = 3;
  int backoff_base_ms = 500;
  FallbackMaskParams fallback_mask;
};

/// Defaults, then the JSON config file (if given), then environment variables
/// SURFCOMP_MASK_URL, SURFCOMP_SCORE_URL, SURFCOMP_CAPTION_URL,
/// SURFCOMP_PROVIDER_TIMEOUT_MS, SURFCOMP_PROVIDER_MAX_INFLIGHT,
/// SURFCOMP_PROVIDER_FALLBACK (0/1). Callers apply command-line flags last.
ProviderConfig load_provider_config(const std::optional<std::filesystem::path>& file = std::nullopt);

/// Applies only the environment overrides on top of `config`.
void apply_provider_env(ProviderConfig& config);

}  // namespace surfcomp
