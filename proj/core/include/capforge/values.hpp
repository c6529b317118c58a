#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace capforge {

// Value types a capability can carry. `none` marks value-less capabilities
// (terminal actions such as accept/reject).
enum class ValueType {
    Ipv4Address,
    PortNumber,
    ProtocolName,
    InterfaceName,
    StringPattern,
    Integer,
    Enum,
    None,
};

const char* to_string(ValueType t);
std::optional<ValueType> value_type_from_string(const std::string& s);

// Ordered value types admit Range values and numeric comparison.
bool is_ordered(ValueType t);

std::optional<std::uint32_t> parse_ipv4(const std::string& s);
std::string format_ipv4(std::uint32_t addr);

// "a.b.c.d/nn" -> [network, broadcast]. Returns nullopt unless the string is
// well-formed CIDR notation.
std::optional<std::pair<std::uint32_t, std::uint32_t>> parse_cidr(const std::string& s);

// True when the string is shaped like a dotted quad (so a malformed one, e.g.
// an octet above 255, is a bad IP rather than an opaque string).
bool looks_like_ipv4(const std::string& s);

struct SingleValue {
    std::string literal;
    bool operator==(const SingleValue&) const = default;
};

// Inclusive range. CIDR literals normalize to ranges at parse time; the
// original spelling is kept so translators can emit native CIDR syntax.
struct RangeValue {
    std::string lo;
    std::string hi;
    std::optional<std::string> spelling;

    RangeValue() = default;
    RangeValue(std::string lo_, std::string hi_, std::optional<std::string> spelling_ = std::nullopt)
        : lo(std::move(lo_)), hi(std::move(hi_)), spelling(std::move(spelling_)) {}

    bool operator==(const RangeValue&) const = default;
};

using Value = std::variant<SingleValue, RangeValue>;

bool is_range(const Value& v);
std::string value_to_display(const Value& v);

// Parses one MLP value out of its document spelling: "v", "lo-hi" (digits
// only), "a.b.c.d/nn". Throws TypeError for malformed IPs, bad CIDR prefixes
// and inverted ranges.
Value parse_value_literal(const std::string& s);
Value make_range_checked(const std::string& lo, const std::string& hi);

// Does `literal` conform to `type`? (enum membership is checked by callers
// that hold the descriptor's enum_values.)
bool literal_conforms(const std::string& literal, ValueType type);

// Equality / ordering used by the match oracle: numeric for ports and
// integers, address order for IPv4, byte equality otherwise.
bool literal_equal(const std::string& a, const std::string& b, ValueType type);
bool literal_in_range(const std::string& v, const std::string& lo, const std::string& hi,
                      ValueType type);

// Packet attribute vs one value (Single -> equality, Range -> containment).
bool value_matches(const std::string& packet_literal, const Value& v, ValueType type);

} // namespace capforge
