#pragma once

#include <ostream>

namespace cpls::cli {

// Exit codes by error class.
inline constexpr int kOk = 0;
inline constexpr int kValidation = 2;
inline constexpr int kEstimation = 3;
inline constexpr int kIo = 4;

/// Entry point behind the `cyclicpls` binary: subcommands fit, cyclic,
/// simulate and validate.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cpls::cli
