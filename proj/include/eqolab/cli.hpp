#pragma once

#include "eqolab/error.hpp"

namespace eqolab {

// Process exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCompareFail = 1;
inline constexpr int kExitMissingInput = 2;
inline constexpr int kExitInvalidParameter = 3;
inline constexpr int kExitProvenanceMismatch = 4;

int exit_code_for(ErrorKind kind);

int run_cli(int argc, char** argv);

}  // namespace eqolab
