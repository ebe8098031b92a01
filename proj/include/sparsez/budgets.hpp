#pragma once

#include <cstdint>

namespace sparsez {

/// Resource limits shared by the enumeration kernels.
struct Budgets {
  // Cap on intermediate values or tuples any single kernel may produce.
  std::uint64_t elements = 100'000'000;
  // Trial division limit for generator factorization.
  std::uint64_t prime_bound = 1'000'000;
  // Interval evaluation starts at working_precision bits and doubles up to
  // precision_cap bits.
  unsigned working_precision = 64;
  unsigned precision_cap = 1u << 16;
};

}  // namespace sparsez
