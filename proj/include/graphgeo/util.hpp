#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace graphgeo {

// Shortest round-trip decimal form (std::to_chars), locale independent.
std::string format_double(double v);

// Dotted-quad IPv4; returns nullopt on anything else.
std::optional<std::array<std::uint8_t, 4>> parse_ipv4(std::string_view s);

inline bool is_ipv4(std::string_view s) { return parse_ipv4(s).has_value(); }

std::vector<std::string> split_csv_line(std::string_view line);

// Strict double parse of a full token.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

} // namespace graphgeo
