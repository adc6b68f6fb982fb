#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dwis {

/// Shortest round-trip decimal representation; "nan"/"inf" for non-finite values.
std::string format_double(double value);

/// Splits one CSV line on commas. No quoting support; the project never writes quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

double parse_double(std::string_view text);

} // namespace dwis
