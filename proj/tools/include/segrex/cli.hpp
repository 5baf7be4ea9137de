#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace segrex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;     // inadmissible datum or bad input
inline constexpr int kExitNumerical = 2;  // solver or classification failure
inline constexpr int kExitUsage = 64;

// Runs one command line (args excludes the program name) and returns the
// exit code. Normal output goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace segrex::cli
