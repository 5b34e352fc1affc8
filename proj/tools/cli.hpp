#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tlsnl::cli {

// exit codes: 0 success, 2 configuration error, 3 solver non-convergence
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

// args excludes the program name; results go to --output or out, the summary line to err
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace tlsnl::cli
