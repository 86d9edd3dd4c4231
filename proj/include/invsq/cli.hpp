#ifndef INVSQ_CLI_HPP
#define INVSQ_CLI_HPP

#include <ostream>

namespace invsq {

/// Exit codes: 0 verified/zero, 1 nonzero residual or contradiction, 2 invalid input.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace invsq

#endif  // INVSQ_CLI_HPP
