#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace specstream {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Level comes from the SPECSTREAM_LOG environment variable
// (error|warn|info|debug); default warn.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("SPECSTREAM_LOG");
        if (env == nullptr) return LogLevel::warn;
        const std::string v(env);
        if (v == "error") return LogLevel::error;
        if (v == "info") return LogLevel::info;
        if (v == "debug") return LogLevel::debug;
        return LogLevel::warn;
    }();
    return level;
}

inline void log_message(LogLevel level, const std::string& msg) {
    if (level > log_level()) return;
    static constexpr const char* kNames[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] %s\n", kNames[static_cast<int>(level)], msg.c_str());
}

}  // namespace specstream

#define SPECSTREAM_LOG_ERROR(msg) ::specstream::log_message(::specstream::LogLevel::error, (msg))
#define SPECSTREAM_LOG_WARN(msg) ::specstream::log_message(::specstream::LogLevel::warn, (msg))
#define SPECSTREAM_LOG_INFO(msg) ::specstream::log_message(::specstream::LogLevel::info, (msg))
#define SPECSTREAM_LOG_DEBUG(msg) ::specstream::log_message(::specstream::LogLevel::debug, (msg))
