#pragma once

#include <string>
#include <string_view>

namespace pathid {

struct AngleParse {
    double value = 0.0;
    bool ok = false;
    /// Offset of the offending character when !ok.
    std::size_t error_offset = 0;
    std::string error;
};

/// Evaluates small constant expressions such as "0.25", "pi/4", "3pi/4",
/// "-pi", "4*pi" or "(1+2)*pi/8".
AngleParse parse_angle_expression(std::string_view text);

/// Throws std::invalid_argument on malformed input.
double parse_angle(std::string_view text);

/// Shortest decimal text that reads back to exactly `value`.
std::string format_double(double value);

}  // namespace pathid
