#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cstree {

/// Runs one CLI invocation; returns 0 on success, 1 on user error, 2 on
/// internal error.  All normal output goes to `out`, diagnostics to `err`.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cstree
