#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace moran {

// Error classes map one-to-one onto CLI exit codes (see cli.hpp).
enum class ErrorKind {
  invalid_spec = 1,
  not_evaluable,
  inconsistent,
  resource,
  parse,
  domain,
  degenerate,
  inapplicable,
  precondition,
  precision,
  regime,
  not_found,
  cap_exceeded,
  io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Level (k or m) the failure refers to, or -1.
  int level() const noexcept { return level_; }
  Error& at_level(int level) {
    level_ = level;
    return *this;
  }

 private:
  ErrorKind kind_;
  int level_ = -1;
};

}  // namespace moran
