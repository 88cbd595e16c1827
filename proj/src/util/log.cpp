#include "fn/util/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include "fn/util/time.hpp"

namespace fn::log {
namespace {
std::atomic<Level> g_level{Level::info};
std::mutex g_mu;

const char* name_of(Level l) {
    switch (l) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
        case Level::off: return "off";
    }
    return "?";
}
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

Level parse_level(std::string_view name) {
    if (name == "debug") return Level::debug;
    if (name == "warn") return Level::warn;
    if (name == "error") return Level::error;
    if (name == "off") return Level::off;
    return Level::info;
}

void write(Level l, std::string_view message) {
    if (l < g_level.load() || g_level.load() == Level::off) return;
    std::lock_guard lock(g_mu);
    std::clog << util::format_iso8601(util::now_utc()) << " [" << name_of(l) << "] " << message << '\n';
}

}  // namespace fn::log
