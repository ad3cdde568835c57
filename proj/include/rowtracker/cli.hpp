#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rowtracker {

/// Exit statuses of dispatch.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand (simulate, track, map, sweep, scene). `args` excludes
/// the program name. Any error prints a single "rowtracker: error: ..." line
/// to `err` and yields a nonzero status.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rowtracker
