#pragma once

#include <string>

namespace qmdp {

// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

// Strict locale-free parsers; the whole token must be consumed.
bool parse_double(const std::string& token, double& out);
bool parse_int(const std::string& token, long long& out);

}  // namespace qmdp
