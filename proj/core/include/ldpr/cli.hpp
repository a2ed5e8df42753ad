#pragma once

#include <iosfwd>

namespace ldpr {

// Entry point of the ldpr tool. Returns 0 on success, 1 on usage errors and
// 2 on data, configuration or fitting errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ldpr
