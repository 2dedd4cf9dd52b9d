#pragma once

#include <string_view>

#include <fmt/format.h>

namespace eqn::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Current verbosity. Initialized from the EQN_LOG environment variable
/// (error|warn|info|debug, default warn).
Level level();
void set_level(Level lvl);

void write(Level lvl, std::string_view message);

template <typename... Args>
void warn(fmt::format_string<Args...> f, Args&&... args) {
    if (level() >= Level::warn) write(Level::warn, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void info(fmt::format_string<Args...> f, Args&&... args) {
    if (level() >= Level::info) write(Level::info, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void debug(fmt::format_string<Args...> f, Args&&... args) {
    if (level() >= Level::debug) write(Level::debug, fmt::format(f, std::forward<Args>(args)...));
}

}  // namespace eqn::log
