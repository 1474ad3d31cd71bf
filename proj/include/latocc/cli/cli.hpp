#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace latocc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitEstimation = 3;
inline constexpr int kExitSimulation = 4;
inline constexpr int kExitEvaluation = 5;

/// Runs the `latocc` command line (args[0] is the program name). Progress
/// goes to `out`, errors to `err`; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latocc
