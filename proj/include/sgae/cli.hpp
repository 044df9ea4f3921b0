#pragma once

// Command-line front end: one binary, one subcommand per pipeline stage.
// Every command stages its outputs in memory and writes them only on success.

#include <iosfwd>
#include <string>
#include <vector>

#include "sgae/error.hpp"

namespace sgae::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNotFound = 3;
inline constexpr int kExitFormat = 4;
inline constexpr int kExitInfeasible = 5;
inline constexpr int kExitNumerical = 6;

int exit_code(ErrorKind kind) noexcept;

// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "SGAE_OUTPUT_ROOT";

// args excludes the program name. A one-line JSON summary goes to `out`;
// failures print one JSON error line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace sgae::cli
