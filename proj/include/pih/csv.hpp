// Locale-free CSV helpers. Doubles are written in shortest round-trip form
// (std::to_chars), so a written value parses back bit-exactly and output is
// byte-stable across runs.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pih {

std::string format_double(double v);
double parse_double(std::string_view s);

std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace pih
