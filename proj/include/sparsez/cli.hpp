#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sparsez::cli {

/// Exit codes of a run.
inline constexpr int kExitOk = 0;
// The computation finished but a certificate check came out negative.
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitContract = 2;
inline constexpr int kExitResource = 3;

/// Runs one sparse-z invocation. `args` excludes the program name. Reports
/// go to `out`; errors are written to `err` as a JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sparsez::cli
