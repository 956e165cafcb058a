#pragma once

#include <stdexcept>
#include <string>

namespace hotspot {

enum class ErrorKind {
  Config,        // bad configuration or missing required column
  Data,          // unusable input data (empty, degenerate, unreadable)
  Precondition,  // caller violated an operation precondition
  Dependency,    // a pipeline stage ran before the stage it depends on
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::Precondition, what);
}

}  // namespace hotspot
