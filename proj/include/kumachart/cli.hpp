#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kumachart::cli {

enum class ExitCode : int {
    ok = 0,
    usage = 1,
    parse = 2,        // malformed data file
    fit = 3,          // degenerate sample, non-converged or failed fits
    calibration = 4,  // no grid rate satisfies the adjustment criterion
    io = 5,
    internal = 6,
};

inline constexpr int kSchemaVersion = 1;

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace kumachart::cli
