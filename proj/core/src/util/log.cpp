#include "surfcomp/util/log.hpp"

#include <mutex>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace surfcomp {

std::shared_ptr<spdlog::logger> logger() {
  static std::once_flag once;
  static std::shared_ptr<spdlog::logger> instance;
  std::call_once(once, [] {
    instance = spdlog::get("surfcomp");
    if (!instance) instance = spdlog::stderr_color_mt("surfcomp");
  });
  return instance;
}

}  // namespace surfcomp
