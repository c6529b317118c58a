#include "capforge/values.hpp"

#include "capforge/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace capforge {

namespace {

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::optional<long long> parse_int(const std::string& s) {
    if (s.empty()) return std::nullopt;
    long long v = 0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (*b == '-') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) return std::nullopt;
    return s[0] == '-' ? -v : v;
}

} // namespace

const char* to_string(ValueType t) {
    switch (t) {
    case ValueType::Ipv4Address: return "ipv4-address";
    case ValueType::PortNumber: return "port-number";
    case ValueType::ProtocolName: return "protocol-name";
    case ValueType::InterfaceName: return "interface-name";
    case ValueType::StringPattern: return "string-pattern";
    case ValueType::Integer: return "integer";
    case ValueType::Enum: return "enum";
    case ValueType::None: return "none";
    }
    return "none";
}

std::optional<ValueType> value_type_from_string(const std::string& s) {
    if (s == "ipv4-address") return ValueType::Ipv4Address;
    if (s == "port-number") return ValueType::PortNumber;
    if (s == "protocol-name") return ValueType::ProtocolName;
    if (s == "interface-name") return ValueType::InterfaceName;
    if (s == "string-pattern") return ValueType::StringPattern;
    if (s == "integer") return ValueType::Integer;
    if (s == "enum") return ValueType::Enum;
    if (s == "none") return ValueType::None;
    return std::nullopt;
}

bool is_ordered(ValueType t) {
    return t == ValueType::PortNumber || t == ValueType::Integer || t == ValueType::Ipv4Address;
}

std::optional<std::uint32_t> parse_ipv4(const std::string& s) {
    std::uint32_t out = 0;
    std::size_t pos = 0;
    for (int octet = 0; octet < 4; ++octet) {
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start || pos - start > 3) return std::nullopt;
        int v = std::stoi(s.substr(start, pos - start));
        if (v > 255) return std::nullopt;
        out = (out << 8) | static_cast<std::uint32_t>(v);
        if (octet < 3) {
            if (pos >= s.size() || s[pos] != '.') return std::nullopt;
            ++pos;
        }
    }
    if (pos != s.size()) return std::nullopt;
    return out;
}

std::string format_ipv4(std::uint32_t addr) {
    return std::to_string((addr >> 24) & 0xFF) + "." + std::to_string((addr >> 16) & 0xFF) + "." +
           std::to_string((addr >> 8) & 0xFF) + "." + std::to_string(addr & 0xFF);
}

std::optional<std::pair<std::uint32_t, std::uint32_t>> parse_cidr(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return std::nullopt;
    auto base = parse_ipv4(s.substr(0, slash));
    auto prefix = parse_int(s.substr(slash + 1));
    if (!base || !prefix || *prefix < 0 || *prefix > 32) return std::nullopt;
    std::uint32_t mask = *prefix == 0 ? 0 : ~std::uint32_t(0) << (32 - *prefix);
    return std::make_pair(*base & mask, (*base & mask) | ~mask);
}

bool looks_like_ipv4(const std::string& s) {
    int dots = 0;
    for (char c : s) {
        if (c == '.') ++dots;
        else if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return dots == 3 && !s.empty();
}

bool is_range(const Value& v) { return std::holds_alternative<RangeValue>(v); }

std::string value_to_display(const Value& v) {
    if (auto* s = std::get_if<SingleValue>(&v)) return s->literal;
    const auto& r = std::get<RangeValue>(v);
    return r.lo + "-" + r.hi;
}

Value make_range_checked(const std::string& lo, const std::string& hi) {
    auto li = parse_int(lo);
    auto hicount = parse_int(hi);
    if (li && hicount) {
        if (*li > *hicount)
            throw Error(errc::type_error, "range endpoints inverted: " + lo + " > " + hi);
        return RangeValue{lo, hi};
    }
    auto lip = parse_ipv4(lo);
    auto hip = parse_ipv4(hi);
    if (lip && hip) {
        if (*lip > *hip)
            throw Error(errc::type_error, "address range inverted: " + lo + " > " + hi);
        return RangeValue{lo, hi};
    }
    throw Error(errc::type_error, "range endpoints are not an ordered type: [" + lo + ", " + hi + "]");
}

Value parse_value_literal(const std::string& s) {
    if (s.find('/') != std::string::npos) {
        auto cidr = parse_cidr(s);
        if (!cidr) throw Error(errc::type_error, "malformed CIDR literal: " + s);
        return RangeValue{format_ipv4(cidr->first), format_ipv4(cidr->second), s};
    }
    // "80-90" spells a numeric range; anything else with a dash stays opaque.
    auto dash = s.find('-');
    if (dash != std::string::npos && dash > 0) {
        std::string lo = s.substr(0, dash);
        std::string hi = s.substr(dash + 1);
        if (all_digits(lo) && all_digits(hi)) return make_range_checked(lo, hi);
    }
    if (looks_like_ipv4(s) && !parse_ipv4(s))
        throw Error(errc::type_error, "malformed IPv4 literal: " + s);
    return SingleValue{s};
}

bool literal_conforms(const std::string& literal, ValueType type) {
    switch (type) {
    case ValueType::Ipv4Address:
        return parse_ipv4(literal).has_value();
    case ValueType::PortNumber: {
        auto v = parse_int(literal);
        return v && *v >= 0 && *v <= 65535;
    }
    case ValueType::Integer:
        return parse_int(literal).has_value();
    case ValueType::ProtocolName:
    case ValueType::InterfaceName:
        return !literal.empty() && literal.find(' ') == std::string::npos;
    case ValueType::StringPattern:
        return !literal.empty();
    case ValueType::Enum:
        return !literal.empty(); // membership checked against enum_values by callers
    case ValueType::None:
        return false;
    }
    return false;
}

bool literal_equal(const std::string& a, const std::string& b, ValueType type) {
    switch (type) {
    case ValueType::PortNumber:
    case ValueType::Integer: {
        auto ia = parse_int(a);
        auto ib = parse_int(b);
        if (ia && ib) return *ia == *ib;
        return a == b;
    }
    case ValueType::Ipv4Address: {
        auto pa = parse_ipv4(a);
        auto pb = parse_ipv4(b);
        if (pa && pb) return *pa == *pb;
        return a == b;
    }
    default:
        return a == b;
    }
}

bool literal_in_range(const std::string& v, const std::string& lo, const std::string& hi,
                      ValueType type) {
    if (type == ValueType::Ipv4Address) {
        auto pv = parse_ipv4(v);
        auto pl = parse_ipv4(lo);
        auto ph = parse_ipv4(hi);
        return pv && pl && ph && *pl <= *pv && *pv <= *ph;
    }
    auto iv = parse_int(v);
    auto il = parse_int(lo);
    auto ih = parse_int(hi);
    return iv && il && ih && *il <= *iv && *iv <= *ih;
}

bool value_matches(const std::string& packet_literal, const Value& v, ValueType type) {
    if (auto* s = std::get_if<SingleValue>(&v)) return literal_equal(packet_literal, s->literal, type);
    const auto& r = std::get<RangeValue>(v);
    return literal_in_range(packet_literal, r.lo, r.hi, type);
}

} // namespace capforge
