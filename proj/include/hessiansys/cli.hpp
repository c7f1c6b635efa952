#pragma once

#include <ostream>

namespace hessiansys {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;  // mathematical failure
inline constexpr int exit_usage = 2;    // bad arguments or config

/// `hessiansys <subcommand> --config <path> [--seed S] [--out DIR]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hessiansys
