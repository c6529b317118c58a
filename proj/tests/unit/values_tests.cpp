#include <doctest.h>

#include "capforge/errors.hpp"
#include "capforge/values.hpp"

using namespace capforge;

TEST_CASE("ipv4 parsing round-trips and rejects bad octets") {
    CHECK(parse_ipv4("192.168.1.1").has_value());
    CHECK(format_ipv4(*parse_ipv4("192.168.1.1")) == "192.168.1.1");
    CHECK(parse_ipv4("0.0.0.0") == 0u);
    CHECK_FALSE(parse_ipv4("256.0.0.1").has_value());
    CHECK_FALSE(parse_ipv4("1.2.3").has_value());
    CHECK_FALSE(parse_ipv4("1.2.3.4.5").has_value());
    CHECK_FALSE(parse_ipv4("a.b.c.d").has_value());
}

TEST_CASE("cidr literals normalize to address ranges") {
    auto r = parse_cidr("192.168.1.0/24");
    REQUIRE(r.has_value());
    CHECK(format_ipv4(r->first) == "192.168.1.0");
    CHECK(format_ipv4(r->second) == "192.168.1.255");

    auto whole = parse_cidr("0.0.0.0/0");
    REQUIRE(whole.has_value());
    CHECK(whole->first == 0u);
    CHECK(whole->second == 0xFFFFFFFFu);

    CHECK_FALSE(parse_cidr("10.0.0.0/33").has_value());
    CHECK_FALSE(parse_cidr("10.0.0.0").has_value());
}

TEST_CASE("value literal parsing recognizes the three document forms") {
    CHECK(std::get<SingleValue>(parse_value_literal("80")).literal == "80");
    CHECK(std::get<SingleValue>(parse_value_literal("TCP")).literal == "TCP");

    auto range = std::get<RangeValue>(parse_value_literal("80-90"));
    CHECK(range.lo == "80");
    CHECK(range.hi == "90");

    auto cidr = std::get<RangeValue>(parse_value_literal("10.0.0.0/30"));
    CHECK(cidr.lo == "10.0.0.0");
    CHECK(cidr.hi == "10.0.0.3");

    // Dashes inside opaque strings stay opaque.
    CHECK(std::holds_alternative<SingleValue>(parse_value_literal("web-server")));
}

TEST_CASE("inverted and malformed literals raise TypeError") {
    CHECK_THROWS_WITH_AS(parse_value_literal("80-70"), doctest::Contains("inverted"), Error);
    CHECK_THROWS_AS(parse_value_literal("999.1.2.3"), Error);
    CHECK_THROWS_AS(parse_value_literal("10.0.0.0/99"), Error);
    CHECK_THROWS_AS(make_range_checked("9.0.0.1", "1.0.0.1"), Error);
    try {
        parse_value_literal("80-70");
        FAIL("expected TypeError");
    } catch (const Error& e) {
        CHECK(e.code() == errc::type_error);
    }
}

TEST_CASE("literal conformance by value type") {
    CHECK(literal_conforms("65535", ValueType::PortNumber));
    CHECK_FALSE(literal_conforms("65536", ValueType::PortNumber));
    CHECK_FALSE(literal_conforms("-1", ValueType::PortNumber));
    CHECK(literal_conforms("-42", ValueType::Integer));
    CHECK(literal_conforms("eth0", ValueType::InterfaceName));
    CHECK_FALSE(literal_conforms("eth 0", ValueType::InterfaceName));
    CHECK_FALSE(literal_conforms("", ValueType::StringPattern));
    CHECK_FALSE(literal_conforms("anything", ValueType::None));
}

TEST_CASE("match primitives compare by type, not by spelling") {
    CHECK(literal_equal("080", "80", ValueType::PortNumber));
    CHECK_FALSE(literal_equal("080", "80", ValueType::ProtocolName));
    CHECK(literal_in_range("10.0.0.5", "10.0.0.0", "10.0.0.9", ValueType::Ipv4Address));
    CHECK_FALSE(literal_in_range("10.0.1.0", "10.0.0.0", "10.0.0.255", ValueType::Ipv4Address));
    CHECK(value_matches("443", RangeValue{"400", "500"}, ValueType::PortNumber));
    CHECK_FALSE(value_matches("443", SingleValue{"80"}, ValueType::PortNumber));
}
