#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hkflow/errors.hpp"

namespace hkflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

/// Usage and configuration failures (InvalidArgument, Io) exit with 1; every
/// numerical or identity failure exits with 2.
int exit_code_for(ErrorKind kind) noexcept;

/// Entry point behind the `hkflow` executable. argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hkflow::cli
