#pragma once

#include <stdexcept>
#include <string>

namespace qls {

// Error categories double as CLI exit codes.
enum class ErrorKind {
  InvalidParameter = 2,
  Config = 2,
  Numerical = 3,
  Io = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string tag, const std::string& what)
      : std::runtime_error(what), kind_(kind), tag_(std::move(tag)) {}

  ErrorKind kind() const { return kind_; }
  // Short machine-readable identifier, e.g. "band-too-small".
  const std::string& tag() const { return tag_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string tag_;
};

inline Error invalid_parameter(const std::string& what) {
  return Error(ErrorKind::InvalidParameter, "invalid-parameter", what);
}

inline Error numerical_error(std::string tag, const std::string& what) {
  return Error(ErrorKind::Numerical, std::move(tag), what);
}

}  // namespace qls
