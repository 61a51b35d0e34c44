#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ritual {

/// Decimal with '.' separator only; the whole string must be consumed.
std::optional<double> parse_decimal(std::string_view text);

std::optional<long long> parse_integer(std::string_view text);

/// Shortest representation that parses back to the same double ("0.91", "1").
std::string format_decimal(double value);

} // namespace ritual
