#pragma once

#include <string>
#include <vector>

namespace sonarfuse::cli {

inline constexpr const char* kToolVersion = "sonarfuse 1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitIoError = 2;

/// Parses the arguments, runs the selected pipeline stage and returns the process exit status.
int run(int argc, char** argv);

/// Convenience overload; args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace sonarfuse::cli
