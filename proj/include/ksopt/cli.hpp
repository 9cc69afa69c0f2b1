#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ksopt/optimize.hpp"

namespace ksopt {

/// Process exit codes of the command-line driver.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,        ///< bad arguments, unreadable or invalid configuration/input files
    exit_solver = 2,       ///< a forward, adjoint or linear solve failed
    exit_verification = 3, ///< a hard invariant or acceptance check failed
};

/// Header: iter,j_total,j_u,j_v,j_f,vi_residual,step,backtracks
void write_csv(std::ostream& out, const OptimizeReport& report);

/// Subcommands: simulate, adjoint, optimize, grad-check, invariants, mms.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// Same as above with the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ksopt
