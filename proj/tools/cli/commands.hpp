#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aitpr::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitUsage = 2,
  kExitIo = 3,
};

// Entry point shared by the executable and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Seed used when --seed is absent: $AITPR_SEED, else 0.
unsigned long long default_seed();

}  // namespace aitpr::cli
