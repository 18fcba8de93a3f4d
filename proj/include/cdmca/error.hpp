#pragma once

#include <stdexcept>
#include <string>

namespace cdmca {

enum class ErrorKind {
  Parse,
  Io,
  DimensionMismatch,
  NonFinite,
  ConstantColumn,
  LengthMismatch,
  OutOfRange,
  DuplicateEdge,
  InvalidArgument,
  SingularG,
  ZeroVariance,
  ZeroWeight,
  EmptyCandidates,
  Degenerate,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers and tests can
/// branch on the category without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cdmca
