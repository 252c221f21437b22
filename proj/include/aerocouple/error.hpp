#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace aerocouple {

/// Error categories shared by the C++ core and the C API.
enum class ErrorCode {
  Parse = 1,
  Validation = 2,
  Convergence = 3,
  Io = 4,
  Numeric = 5,
  InvalidArgument = 6,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Malformed input text. Line and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
public:
  ParseError(const std::string& message, int line = 0, int column = 0);

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  int line_;
  int column_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorCode::Validation, message) {}
};

class ConvergenceError : public Error {
public:
  explicit ConvergenceError(const std::string& message)
      : Error(ErrorCode::Convergence, message) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& message) : Error(ErrorCode::Io, message) {}
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& message)
      : Error(ErrorCode::Numeric, message) {}
};

class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& message)
      : Error(ErrorCode::InvalidArgument, message) {}
};

namespace log {

enum class Level { Debug, Info, Warning };

using Sink = std::function<void(Level, const std::string&)>;

// Process-wide sink. The default discards debug/info and prints warnings to stderr.
void set_sink(Sink sink);
void write(Level level, const std::string& message);
inline void info(const std::string& message) { write(Level::Info, message); }
inline void warn(const std::string& message) { write(Level::Warning, message); }

}  // namespace log
}  // namespace aerocouple
