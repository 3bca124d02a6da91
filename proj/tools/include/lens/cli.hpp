#pragma once

#include <ostream>

namespace lens::cli {

// Exit codes: 0 ok, 1 internal failure, 2 bad flags/config/input,
// 3 too many failed accuracy evaluations during `search`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitEvaluatorFailures = 3;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lens::cli
