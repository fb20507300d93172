#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace stcomp::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Level comes from the STCOMP_LOG environment variable (debug|info|warn|error|off),
// default warn.
inline Level threshold() {
  static Level lvl = [] {
    const char* env = std::getenv("STCOMP_LOG");
    if (env == nullptr) return Level::warn;
    if (std::strcmp(env, "debug") == 0) return Level::debug;
    if (std::strcmp(env, "info") == 0) return Level::info;
    if (std::strcmp(env, "warn") == 0) return Level::warn;
    if (std::strcmp(env, "error") == 0) return Level::error;
    if (std::strcmp(env, "off") == 0) return Level::off;
    return Level::warn;
  }();
  return lvl;
}

inline void emit(Level lvl, const char* tag, const std::string& msg) {
  if (lvl < threshold()) return;
  std::fprintf(stderr, "[stcomp %s] %s\n", tag, msg.c_str());
}

inline void debug(const std::string& msg) { emit(Level::debug, "debug", msg); }
inline void info(const std::string& msg) { emit(Level::info, "info", msg); }
inline void warn(const std::string& msg) { emit(Level::warn, "warn", msg); }
inline void error(const std::string& msg) { emit(Level::error, "error", msg); }

}  // namespace stcomp::log
