#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nvbsim {

// Exit code contract: config errors -> 1, I/O errors -> 2, broken internal
// invariants -> 3. The CLI maps these exception types onto those codes.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
  ParseError(std::uint64_t line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
  std::uint64_t line;
};

struct InternalError : std::logic_error {
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace nvbsim

// State machine preconditions that must hold regardless of input. A failure
// here is a simulator bug, never a user error.
#define NVB_CHECK(cond, msg)                                 \
  do {                                                       \
    if (!(cond)) throw ::nvbsim::InternalError(msg);         \
  } while (0)
