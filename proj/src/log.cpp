#include "stancepipe/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <string>

namespace stancepipe::log {
namespace {

std::atomic<Level> current{Level::info};
std::mutex sink_mutex;

void emit(Level at, const char* tag, std::string_view msg) {
  if (at < current.load()) return;
  std::lock_guard lock(sink_mutex);
  std::cerr << '[' << tag << "] " << msg << '\n';
}

}  // namespace

void set_level(Level level) { current.store(level); }
Level level() { return current.load(); }

Level parse_level(std::string_view name) {
  if (name == "debug") return Level::debug;
  if (name == "info") return Level::info;
  if (name == "warn" || name == "warning") return Level::warn;
  if (name == "error") return Level::error;
  if (name == "off") return Level::off;
  throw std::invalid_argument("unknown log level '" + std::string(name) + "'");
}

void debug(std::string_view msg) { emit(Level::debug, "debug", msg); }
void info(std::string_view msg) { emit(Level::info, "info", msg); }
void warn(std::string_view msg) { emit(Level::warn, "warn", msg); }
void error(std::string_view msg) { emit(Level::error, "error", msg); }

}  // namespace stancepipe::log
