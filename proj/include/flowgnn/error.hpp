#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowgnn {

/// Machine-readable failure categories. The CLI prints the name of the code
/// on standard error so scripts can match on it.
enum class ErrorCode {
  VersionMismatch,
  TruncatedPacket,
  CountOutOfRange,
  Ipv6Unsupported,
  MissingColumn,
  MalformedRow,
  EmptySubnetList,
  InvalidConfig,
  DomainError,
  NodeNotFound,
  DimensionMismatch,
  UnknownClass,
  LengthMismatch,
  IoError,
};

constexpr std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::TruncatedPacket: return "TruncatedPacket";
    case ErrorCode::CountOutOfRange: return "CountOutOfRange";
    case ErrorCode::Ipv6Unsupported: return "Ipv6Unsupported";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptySubnetList: return "EmptySubnetList";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NodeNotFound: return "NodeNotFound";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(code_name(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace flowgnn
