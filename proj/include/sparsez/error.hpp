#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sparsez {

enum class ErrorCode {
  InvalidSpec,
  UnsupportedBound,
  BoundExceeded,
  CacheMiss,
  CorruptCache,
  NotInMonoid,
  NotIndependent,
  FactorizationIncomplete,
  WindowTooSmall,
  BudgetExceeded,
  NotFoundUpTo,
  PrecisionExhausted,
  InconsistentDecomposition,
  NotWeaklyIncreasing,
  NotStabilized,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Budget, cap and precision exhaustion. Everything else is a contract error.
bool is_resource_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sparsez
