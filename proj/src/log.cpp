#include "cgbp/log.hpp"

#include <cstdlib>
#include <mutex>
#include <string_view>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace cgbp {

std::shared_ptr<spdlog::logger> logger() {
  static std::once_flag once;
  static std::shared_ptr<spdlog::logger> instance;
  std::call_once(once, [] {
    instance = spdlog::stderr_color_mt("cgbp");
    instance->set_pattern("[%l] %v");
    const char* env = std::getenv("COLGEN_LOG");
    const std::string_view level = env ? env : "off";
    if (level == "debug") {
      instance->set_level(spdlog::level::debug);
    } else if (level == "info") {
      instance->set_level(spdlog::level::info);
    } else {
      instance->set_level(spdlog::level::off);
    }
  });
  return instance;
}

}  // namespace cgbp
