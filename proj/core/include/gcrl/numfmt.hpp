#pragma once

#include <string>
#include <string_view>

namespace gcrl {

// Shortest round-trip decimal representation, independent of the C locale.
// Infinities print as "inf"/"-inf".
std::string format_double(double value);

// Locale-independent parse of a full token; throws ParseError on trailing junk.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

}  // namespace gcrl
