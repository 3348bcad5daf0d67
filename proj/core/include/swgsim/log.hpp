#pragma once

#include <cstdarg>

namespace swg {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

// Current threshold. Initialized once from the SWGSIM_LOG environment
// variable ("debug", "info", "warn", "error", "off"); defaults to warn.
LogLevel log_level();
void set_log_level(LogLevel level);

void log_message(LogLevel level, const char* fmt, ...);

}  // namespace swg

#define SWG_LOG_DEBUG(...) ::swg::log_message(::swg::LogLevel::Debug, __VA_ARGS__)
#define SWG_LOG_INFO(...) ::swg::log_message(::swg::LogLevel::Info, __VA_ARGS__)
#define SWG_LOG_WARN(...) ::swg::log_message(::swg::LogLevel::Warn, __VA_ARGS__)
#define SWG_LOG_ERROR(...) ::swg::log_message(::swg::LogLevel::Error, __VA_ARGS__)
