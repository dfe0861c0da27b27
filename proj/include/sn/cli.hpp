#ifndef SN_CLI_HPP
#define SN_CLI_HPP

#include <ostream>

namespace sn {

// Dispatch for the command-line tool.  Exit codes: 0 success/converged,
// 2 malformed input, 3 boundary-resolved fit, 4 fit failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sn

#endif
