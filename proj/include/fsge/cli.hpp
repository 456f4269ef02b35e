#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fsge::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;  // verify found a failing oracle
inline constexpr int kExitUsage = 2;        // bad flags or config
inline constexpr int kExitSolver = 3;       // a run or sweep row failed

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

}  // namespace fsge::cli
