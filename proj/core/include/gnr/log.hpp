#ifndef GNR_LOG_HPP_
#define GNR_LOG_HPP_

#include <string>

namespace gnr {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Level comes from the GNODE_REACH_LOG env var (error|warn|info|debug);
// default warn. Output goes to stderr only.
LogLevel log_level();
void log_message(LogLevel level, const std::string& msg);

inline void log_info(const std::string& msg) { log_message(LogLevel::Info, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::Warn, msg); }
inline void log_debug(const std::string& msg) { log_message(LogLevel::Debug, msg); }

}  // namespace gnr

#endif  // GNR_LOG_HPP_
