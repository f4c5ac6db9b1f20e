#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>

namespace popsynth::logging {

enum class Level : int { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

// Verbosity comes from the POPSYNTH_LOG environment variable
// (off|error|warn|info|debug). Default: warn.
inline Level threshold() {
    static Level level = [] {
        const char *env = std::getenv("POPSYNTH_LOG");
        if (env == nullptr) return Level::warn;
        std::string v{env};
        if (v == "off") return Level::off;
        if (v == "error") return Level::error;
        if (v == "warn") return Level::warn;
        if (v == "info") return Level::info;
        if (v == "debug") return Level::debug;
        return Level::warn;
    }();
    return level;
}

inline void emit(Level level, const std::string &msg) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    const char *tag = level == Level::error  ? "error"
                      : level == Level::warn ? "warn"
                      : level == Level::info ? "info"
                                             : "debug";
    std::clog << "[popsynth:" << tag << "] " << msg << '\n';
}

inline void error(const std::string &msg) { emit(Level::error, msg); }
inline void warn(const std::string &msg) { emit(Level::warn, msg); }
inline void info(const std::string &msg) { emit(Level::info, msg); }
inline void debug(const std::string &msg) { emit(Level::debug, msg); }

} // namespace popsynth::logging
