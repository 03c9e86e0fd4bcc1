#pragma once

#include <iosfwd>

namespace epec {

inline constexpr const char* kToolVersion = "0.1.0";

/// Entry point of the `epec` executable: sample, train, solve, validate,
/// auction. Returns 0 on success, 1 on a runtime error and 2 on a usage
/// error; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace epec
