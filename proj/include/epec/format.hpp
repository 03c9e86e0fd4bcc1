#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace epec {

/// Shortest decimal text that reads back to the same double.
std::string fmt_double(double v);

/// Strict parse of a full field; throws ParseError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);

/// Splits one CSV line on commas (no quoting; fields are plain numbers and
/// identifiers). Trailing '\r' is dropped.
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads every non-empty line of a CSV stream.
std::vector<std::vector<std::string>> read_csv(std::istream& in);

}  // namespace epec
