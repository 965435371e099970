#include "citescope/dates.hpp"

#include <cstdio>
#include <stdexcept>

namespace citescope {

namespace {

bool parse_int(std::string_view s, int& out) {
    if (s.empty() || s.size() > 6) return false;
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

}  // namespace

Month Month::of(int year, int month) {
    if (month < 1 || month > 12) throw std::invalid_argument("month out of range 1..12");
    return Month{year * 12 + month - 1};
}

std::optional<Month> Month::parse(std::string_view s) {
    if (s.size() != 7 || s[4] != '-') return std::nullopt;
    int y = 0, m = 0;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m)) return std::nullopt;
    if (m < 1 || m > 12) return std::nullopt;
    return Month::of(y, m);
}

std::string Month::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year(), month());
    return buf;
}

Date Date::of(int year, int month, int day) {
    if (month < 1 || month > 12) throw std::invalid_argument("month out of range 1..12");
    if (day < 1 || day > 31) throw std::invalid_argument("day out of range 1..31");
    Date dt;
    dt.y = static_cast<int16_t>(year);
    dt.m = static_cast<uint8_t>(month);
    dt.d = static_cast<uint8_t>(day);
    return dt;
}

std::optional<Date> Date::parse(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
        !parse_int(s.substr(8, 2), d))
        return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    return Date::of(y, m, d);
}

std::string Date::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(y), static_cast<int>(m),
                  static_cast<int>(d));
    return buf;
}

}  // namespace citescope
