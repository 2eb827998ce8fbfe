#pragma once

namespace fairprice {

/// Exit codes: 0 ok, 1 runtime failure, 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace fairprice
