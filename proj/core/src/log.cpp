#include "swgsim/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace swg {

namespace {

LogLevel parse_env_level() {
    const char* env = std::getenv("SWGSIM_LOG");
    if (env == nullptr) {
        return LogLevel::Warn;
    }
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::Error;
    if (std::strcmp(env, "off") == 0) return LogLevel::Off;
    return LogLevel::Warn;
}

LogLevel g_level = parse_env_level();

const char* level_tag(LogLevel level) {
    switch (level) {
        case LogLevel::Debug: return "DEBUG";
        case LogLevel::Info: return "INFO";
        case LogLevel::Warn: return "WARN";
        case LogLevel::Error: return "ERROR";
        default: return "?";
    }
}

}  // namespace

LogLevel log_level() {
    return g_level;
}

void set_log_level(LogLevel level) {
    g_level = level;
}

void log_message(LogLevel level, const char* fmt, ...) {
    if (level < g_level) {
        return;
    }
    std::fprintf(stderr, "[swgsim %s] ", level_tag(level));
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

}  // namespace swg
