#include "cdmca/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

#include "cdmca/error.hpp"

namespace cdmca {
namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler h) {
  std::lock_guard lock(handler_mutex());
  return std::exchange(handler(), std::move(h));
}

void warn(const std::string& message) {
  std::lock_guard lock(handler_mutex());
  if (handler()) handler()(message);
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::NonFinite: return "non-finite value";
    case ErrorKind::ConstantColumn: return "constant column";
    case ErrorKind::LengthMismatch: return "length mismatch";
    case ErrorKind::OutOfRange: return "index out of range";
    case ErrorKind::DuplicateEdge: return "duplicate edge";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::SingularG: return "singular G";
    case ErrorKind::ZeroVariance: return "zero variance";
    case ErrorKind::ZeroWeight: return "zero total weight";
    case ErrorKind::EmptyCandidates: return "empty candidate set";
    case ErrorKind::Degenerate: return "degenerate split";
  }
  return "error";
}

}  // namespace cdmca
