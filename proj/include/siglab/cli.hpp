// Command-line surface: simulate | clt | moments-reference | diagnose |
// calibrate | support. Every command is deterministic under fixed flags;
// the default seed can be overridden with the SIGLAB_SEED environment
// variable (an explicit --seed always wins).
#pragma once

#include <string>
#include <vector>

namespace siglab::cli {

int run(int argc, const char* const* argv);

// Convenience for tests: args without the program name.
int run(const std::vector<std::string>& args);

}  // namespace siglab::cli
