#pragma once

#include <memory>

namespace spdlog {
class logger;
}

namespace cgbp {

// Shared stderr logger; level from COLGEN_LOG={off,info,debug}.
std::shared_ptr<spdlog::logger> logger();

}  // namespace cgbp
