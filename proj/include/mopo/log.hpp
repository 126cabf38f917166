#pragma once

namespace mopo {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Level parsed once from MOPO_LOG (error|warn|info|debug); default warn.
LogLevel log_level();

inline bool log_on(LogLevel level) { return static_cast<int>(level) <= static_cast<int>(log_level()); }

} // namespace mopo
