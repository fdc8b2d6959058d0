#pragma once

#include <stdexcept>
#include <string>

namespace swbf {

enum class ErrorKind {
  InvalidArgument,
  ShapeMismatch,
  EmptyPhantom,
  LengthNotPowerOfTwo,
  SupportTooLarge,
  InvalidInput,
  DegenerateChannel,
  SingularCovariance,
  NonFiniteLoss,
  Io,
  CorruptFile,
  Config,
  EmptyRegion,
  ZeroVariance,
  ZeroMean,
  NoPeak,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` distinguishes failure classes.
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

}  // namespace swbf
