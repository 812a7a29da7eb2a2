#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vibra {

enum class ErrorKind {
  NotPositiveDefinite,
  IndefiniteStiffness,
  EigenFailure,
  InvalidParams,
  OutOfSupport,
  BranchAmbiguity,
  OutOfWindow,
  BinMismatch,
  InsufficientData,
  PoorFit,
  QuadratureFailure,
  Validation,
  Io,
  Mismatch,
};

std::string_view to_string(ErrorKind kind);

/// True for errors caused by bad input rather than a numerical breakdown.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace vibra
