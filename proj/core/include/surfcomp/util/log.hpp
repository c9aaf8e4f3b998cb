#pragma once

#include <memory>

#include <spdlog/spdlog.h>

namespace surfcomp {

/// Library-wide logger ("surfcomp"), created on first use on stderr.
std::shared_ptr<spdlog::logger> logger();

}  // namespace surfcomp
