#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rset {

/// Broad failure categories. The CLI prints these as a stable prefix.
enum class ErrorKind {
  InvalidArgument,
  Io,
  Parse,
  Shape,
  Numerical,
  MissingArtifact,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace rset
