#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace halp::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericError = 3;
inline constexpr int kResourceError = 4;

/// Default output directory when --out is absent.
inline constexpr const char* kOutputDirEnv = "HALP_OUTPUT_DIR";

/// Fixed header of every evaluation CSV.
inline constexpr const char* kEvaluationHeader = "method,seed,mean,std,trajectories,horizon,objective,runtime_s";

/// Runs one command line. argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace halp::cli
