#include "gnr/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace gnr {

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("GNODE_REACH_LOG");
    if (!env) return LogLevel::Warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::Error;
    if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

void log_message(LogLevel level, const std::string& msg) {
  if (level > log_level()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[gnode-reach:%s] %s\n",
               names[static_cast<int>(level)], msg.c_str());
}

}  // namespace gnr
