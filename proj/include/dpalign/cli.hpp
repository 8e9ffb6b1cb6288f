#pragma once

#include <iosfwd>
#include <string_view>

namespace dpalign {

inline constexpr std::string_view kVersion = "0.1.0";

/// Entry point shared by the dpalign executable and the tests.
/// Exit codes: 0 success, 1 runtime or parse failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpalign
