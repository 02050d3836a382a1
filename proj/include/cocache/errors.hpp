#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace cocache {

/// Input violated a documented precondition (bad dimensions, negative demand,
/// out-of-range file id, weights off the simplex, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A CSV or config file could not be parsed. The message names the file and
/// line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Slot or sBS index out of range.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

using WarningHandler = std::function<void(const std::string&)>;

// Non-fatal diagnostics go through a process-wide handler (stderr by default).
void warn(const std::string& message);
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace cocache
