#pragma once

#include <iosfwd>

namespace isospec {

/// Entry point of the `isospec` command. Reports go to `out`, diagnostics to
/// `err`. Returns 0 on pass, 1 on a domain failure (validation, verification,
/// violated admissibility), 2 on usage, IO or parse errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace isospec
