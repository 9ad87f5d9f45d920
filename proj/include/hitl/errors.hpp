#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hitl {

// Malformed or out-of-order input data (non-monotonic timestamps, bad fields).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A component received an event that its protocol does not allow in the
// current state. For the pipeline this signals an internal bug.
class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CalibrationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trace replay failure; line is 1-based, 0 when not tied to a line.
class ReplayError : public std::runtime_error {
 public:
  ReplayError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace hitl
