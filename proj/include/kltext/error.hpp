#ifndef KLTEXT_ERROR_HPP
#define KLTEXT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace kltext {

enum class ErrorCode {
  IoError,
  EmptyClass,
  EmptyDocument,
  DimensionMismatch,
  LengthMismatch,
  IndexOutOfRange,
  SingularCovariance,
  ZeroData,
  NullProjection,
  AllNull,
  InfeasibleClass,
  TooFewDocs,
  InvalidArgument,
  FormatError,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// the CLI can map it to an exit status and tests can match on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::ZeroData: return "ZeroData";
    case ErrorCode::NullProjection: return "NullProjection";
    case ErrorCode::AllNull: return "AllNull";
    case ErrorCode::InfeasibleClass: return "InfeasibleClass";
    case ErrorCode::TooFewDocs: return "TooFewDocs";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

}  // namespace kltext

#endif  // KLTEXT_ERROR_HPP
