#include "aerocouple/error.hpp"

#include <iostream>
#include <mutex>

namespace aerocouple {

namespace {

std::string with_location(const std::string& message, int line, int column) {
  if (line <= 0) return message;
  std::string out = "line " + std::to_string(line);
  if (column > 0) out += ", column " + std::to_string(column);
  return out + ": " + message;
}

}  // namespace

ParseError::ParseError(const std::string& message, int line, int column)
    : Error(ErrorCode::Parse, with_location(message, line, column)),
      line_(line),
      column_(column) {}

namespace log {

namespace {

std::mutex sink_mutex;

Sink& sink_ref() {
  static Sink sink = [](Level level, const std::string& message) {
    if (level == Level::Warning) std::cerr << "warning: " << message << '\n';
  };
  return sink;
}

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex);
  sink_ref() = std::move(sink);
}

void write(Level level, const std::string& message) {
  std::lock_guard lock(sink_mutex);
  if (sink_ref()) sink_ref()(level, message);
}

}  // namespace log
}  // namespace aerocouple
