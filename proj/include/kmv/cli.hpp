#pragma once

#include <iosfwd>

namespace kmv {

// Entry point of the `kmv` tool. Exit codes: 0 success, 1 usage or
// validation error, 2 runtime error (out-of-grid, CFL, boundary mass, IO).
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace kmv
