#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace strapsim::util {

std::string_view trim(std::string_view text) noexcept;

// Whole-string decimal parse (leading/trailing blanks allowed). Rejects
// empty input, trailing garbage, and non-finite results.
std::optional<double> parse_double(std::string_view text) noexcept;
std::optional<long long> parse_int(std::string_view text) noexcept;

// Shortest round-trip form; used for scores and matrices.
std::string format_double(double value);
// Twelve significant digits; used for weights.
std::string format_weight(double value);

}  // namespace strapsim::util
