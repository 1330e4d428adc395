#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chdisc {

// Command-line driver behind the chdisc binary. args are the argv entries
// after the program name; normal output goes to out, diagnostics to err.
// Returns the process exit code: 0 success (mei-check: condition holds,
// certify: verdict positive), 1 for a negative mei-check or certify answer,
// 2 for input or validation errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace chdisc
