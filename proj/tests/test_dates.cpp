#include <doctest.h>

#include "citescope/dates.hpp"

using namespace citescope;

TEST_SUITE("dates") {

TEST_CASE("month parse and format round-trip") {
    auto m = Month::parse("2020-03");
    REQUIRE(m.has_value());
    CHECK(m->year() == 2020);
    CHECK(m->month() == 3);
    CHECK(m->str() == "2020-03");

    CHECK_FALSE(Month::parse("2020-13").has_value());
    CHECK_FALSE(Month::parse("2020-00").has_value());
    CHECK_FALSE(Month::parse("202-01").has_value());
    CHECK_FALSE(Month::parse("2020/01").has_value());
}

TEST_CASE("month arithmetic crosses year boundaries") {
    const Month m = Month::of(2020, 11);
    CHECK(m.plus(1) == Month::of(2020, 12));
    CHECK(m.plus(2) == Month::of(2021, 1));
    CHECK(m.plus(26) == Month::of(2023, 1));
    CHECK(m.plus(-11) == Month::of(2019, 12));
    CHECK(months_between(Month::of(2010, 1), Month::of(2024, 12)) == 179);
}

TEST_CASE("date ordering is by (year, month, day)") {
    const Date a = Date::of(2020, 1, 31);
    const Date b = Date::of(2020, 2, 1);
    CHECK(a < b);
    CHECK(Date::of(2019, 12, 31) < a);
    CHECK(a == Date::of(2020, 1, 31));
    CHECK(a.month_of() == Month::of(2020, 1));
}

TEST_CASE("date parse rejects malformed input") {
    CHECK(Date::parse("2020-01-15").has_value());
    CHECK_FALSE(Date::parse("2020-01-32").has_value());
    CHECK_FALSE(Date::parse("2020-1-15").has_value());
    CHECK_FALSE(Date::parse("2020-01-15T00:00").has_value());
    CHECK(Date::parse("2020-01-15")->str() == "2020-01-15");
}

}  // TEST_SUITE
