#include "vibra/error.hpp"

namespace vibra {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::IndefiniteStiffness: return "IndefiniteStiffness";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::OutOfSupport: return "OutOfSupport";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::OutOfWindow: return "OutOfWindow";
    case ErrorKind::BinMismatch: return "BinMismatch";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::PoorFit: return "PoorFit";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::Validation: return "Validation";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Mismatch: return "Mismatch";
  }
  return "Unknown";
}

bool is_validation_error(ErrorKind kind) {
  return kind == ErrorKind::Validation || kind == ErrorKind::InvalidParams || kind == ErrorKind::Io;
}

}  // namespace vibra
