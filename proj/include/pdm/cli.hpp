#pragma once

#include <iosfwd>

namespace pdm {

/// Exit codes: 0 success, 1 data or model error, 2 usage error.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace pdm
