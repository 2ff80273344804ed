#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mgpusim {

enum class ErrorCategory {
  Config,
  Parse,
  Integrity,
  OutOfMemory,
  ModeViolation,
  Io,
};

inline std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Integrity: return "integrity";
    case ErrorCategory::OutOfMemory: return "out-of-memory";
    case ErrorCategory::ModeViolation: return "mode-violation";
    case ErrorCategory::Io: return "io";
  }
  return "unknown";
}

// Process exit code used by the CLI for each category.
inline int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Parse: return 3;
    case ErrorCategory::Integrity: return 4;
    case ErrorCategory::OutOfMemory: return 5;
    case ErrorCategory::ModeViolation: return 6;
    case ErrorCategory::Io: return 7;
  }
  return 1;
}

class SimError : public std::runtime_error {
 public:
  SimError(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& msg) {
  throw SimError(c, msg);
}

}  // namespace mgpusim
