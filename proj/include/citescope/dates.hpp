#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace citescope {

// Calendar month stored as a flat index (year * 12 + month - 1), so month
// arithmetic and ordering are plain integer operations.
struct Month {
    int32_t index = 0;

    static Month of(int year, int month);
    // Parses "YYYY-MM". Returns nullopt on malformed input.
    static std::optional<Month> parse(std::string_view s);

    int year() const { return index >= 0 ? index / 12 : -((-index + 11) / 12); }
    int month() const { int m = index % 12; if (m < 0) m += 12; return m + 1; }
    Month plus(int months) const { return Month{index + months}; }

    auto operator<=>(const Month&) const = default;

    std::string str() const;  // "YYYY-MM"
};

// Full calendar date; ordering is lexicographic on (year, month, day).
// Days are validated to 1..31 only: the engine needs ordering, not a
// full civil calendar.
struct Date {
    int16_t y = 1970;
    uint8_t m = 1;
    uint8_t d = 1;

    static Date of(int year, int month, int day);
    // Parses "YYYY-MM-DD". Returns nullopt on malformed input.
    static std::optional<Date> parse(std::string_view s);

    Month month_of() const { return Month::of(y, m); }

    auto operator<=>(const Date&) const = default;

    std::string str() const;  // "YYYY-MM-DD"
};

// Number of calendar months from a to b (b - a), negative when b precedes a.
inline int months_between(Month a, Month b) { return b.index - a.index; }

}  // namespace citescope
