#include "swbf/error.hpp"

namespace swbf {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyPhantom: return "EmptyPhantom";
    case ErrorKind::LengthNotPowerOfTwo: return "LengthNotPowerOfTwo";
    case ErrorKind::SupportTooLarge: return "SupportTooLarge";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::DegenerateChannel: return "DegenerateChannel";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::Io: return "Io";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::Config: return "Config";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::ZeroMean: return "ZeroMean";
    case ErrorKind::NoPeak: return "NoPeak";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace swbf
