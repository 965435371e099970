#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace citescope {

// Shortest round-trip decimal representation (std::to_chars). Used for every
// float that lands in a file so identical values always serialize to
// identical bytes.
std::string fmt_double(double v);
std::string fmt_float(float v);

// Empty string for absent values; report CSV serializes absences as empty
// fields.
std::string fmt_opt(const std::optional<double>& v);

// JSON string escaping for the handful of places that hand-emit JSON.
std::string json_escape(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<float> parse_float(std::string_view s);
std::optional<int64_t> parse_int64(std::string_view s);

}  // namespace citescope
