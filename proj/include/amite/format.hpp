#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

namespace amite {

/// 17 significant digits: round-trips every double.
inline std::string format_double(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", x);
    return buffer;
}

/// Strict decimal parse: the whole string must be consumed.
inline double parse_double(std::string_view text) {
    const std::string s(text);
    if (s.empty()) throw std::invalid_argument("empty number");
    char* end = nullptr;
    const double value = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return value;
}

}  // namespace amite
