#include "tethersim/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace tethersim {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("TETHERSIM_LOG");
    if (env == nullptr) return LogLevel::kError;
    if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
    if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
    return LogLevel::kError;
  }();
  return level;
}

bool log_enabled(LogLevel level) { return static_cast<int>(level) <= static_cast<int>(log_level()); }

void log_message(LogLevel level, const std::string& msg) {
  if (!log_enabled(level)) return;
  const char* tag = level == LogLevel::kDebug ? "debug" : level == LogLevel::kInfo ? "info" : "error";
  std::fprintf(stderr, "[tethersim:%s] %s\n", tag, msg.c_str());
}

}  // namespace tethersim
