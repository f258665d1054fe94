#pragma once

namespace tds {

/// Command-line entry point.  Exit codes: 0 success, 1 usage error,
/// 2 malformed model/netlist/file, 3 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace tds
