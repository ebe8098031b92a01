#include "sparsez/error.hpp"

namespace sparsez {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::UnsupportedBound: return "UnsupportedBound";
    case ErrorCode::BoundExceeded: return "BoundExceeded";
    case ErrorCode::CacheMiss: return "CacheMiss";
    case ErrorCode::CorruptCache: return "CorruptCache";
    case ErrorCode::NotInMonoid: return "NotInMonoid";
    case ErrorCode::NotIndependent: return "NotIndependent";
    case ErrorCode::FactorizationIncomplete: return "FactorizationIncomplete";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NotFoundUpTo: return "NotFoundUpTo";
    case ErrorCode::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorCode::InconsistentDecomposition: return "InconsistentDecomposition";
    case ErrorCode::NotWeaklyIncreasing: return "NotWeaklyIncreasing";
    case ErrorCode::NotStabilized: return "NotStabilized";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_resource_error(ErrorCode code) {
  return code == ErrorCode::BudgetExceeded ||
         code == ErrorCode::PrecisionExhausted ||
         code == ErrorCode::NotFoundUpTo;
}

}  // namespace sparsez
