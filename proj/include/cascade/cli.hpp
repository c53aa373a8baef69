#ifndef CASCADE_CLI_HPP
#define CASCADE_CLI_HPP

#include <string>

#include "cascade/config.hpp"

namespace cascade {

/// Runs one batch command end to end and writes its artifacts under the
/// configured output directory. Returns the process exit status: 0 when all
/// gates pass, 1 on a gate failure. Errors propagate as exceptions (the
/// binary maps them to exit status 2).
///
/// Commands: mesh, solve, convergence, lift-check, tensor-check, dq-check,
/// shift-check.
int dispatch(const std::string& command, const RunConfig& cfg, int level_override = -1);

}  // namespace cascade

#endif
