#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace carfollow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Diagnostics go to `err`; CSV goes to `out` when no output
/// file is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace carfollow::cli
