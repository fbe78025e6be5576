#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace advtrade {

/// Shortest round-trip decimal representation ("nan" for NaN).
std::string format_double(double v);

std::vector<std::string_view> split_csv_line(std::string_view line);

double parse_double(std::string_view field);

} // namespace advtrade
