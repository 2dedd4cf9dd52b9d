#include "eqn/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace eqn::log {

namespace {

Level from_env() {
    const char* raw = std::getenv("EQN_LOG");
    if (raw == nullptr) return Level::warn;
    std::string v(raw);
    if (v == "error") return Level::error;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
}

std::atomic<Level>& current() {
    static std::atomic<Level> lvl{from_env()};
    return lvl;
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

constexpr std::string_view tag(Level lvl) {
    switch (lvl) {
        case Level::error: return "error";
        case Level::warn: return "warn";
        case Level::info: return "info";
        case Level::debug: return "debug";
    }
    return "?";
}

}  // namespace

Level level() { return current().load(std::memory_order_relaxed); }

void set_level(Level lvl) { current().store(lvl, std::memory_order_relaxed); }

void write(Level lvl, std::string_view message) {
    std::lock_guard lock(sink_mutex());
    std::cerr << "[eqn " << tag(lvl) << "] " << message << '\n';
}

}  // namespace eqn::log
