#pragma once

#include <string>

namespace tethersim {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

/// Level parsed once from TETHERSIM_LOG (error|info|debug); default error.
LogLevel log_level();

bool log_enabled(LogLevel level);

void log_message(LogLevel level, const std::string& msg);

}  // namespace tethersim
