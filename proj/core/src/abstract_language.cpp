#include "capforge/abstract_language.hpp"

#include "capforge/errors.hpp"

#include <algorithm>

namespace capforge::mlp {

using nlohmann::json;
using catalogue::CapabilityDescriptor;
using catalogue::CapabilityKind;
using catalogue::Catalogue;
using catalogue::Operator;
using catalogue::ResolvedNsf;

namespace {

// Octet pattern tolerating leading zeros, like the runtime IPv4 parser.
constexpr const char* kOctet = "(25[0-5]|2[0-4][0-9]|1[0-9][0-9]|0[0-9][0-9]|[0-9][0-9]?)";
constexpr const char* kPortCore = "(6553[0-5]|655[0-2][0-9]|65[0-4][0-9]{2}|6[0-4][0-9]{3}|[1-5][0-9]{4}|[0-9]{1,4})";

std::string ipv4_pattern() {
    std::string o = kOctet;
    return "^" + o + "\\." + o + "\\." + o + "\\." + o + "$";
}

std::string cidr_pattern() {
    std::string o = kOctet;
    return "^" + o + "\\." + o + "\\." + o + "\\." + o + "/(3[0-2]|[12]?[0-9])$";
}

std::string port_pattern() { return std::string("^0*") + kPortCore + "$"; }
std::string port_span_pattern() { return std::string("^0*") + kPortCore + "-0*" + kPortCore + "$"; }

json single_literal_schema(const CapabilityDescriptor& desc) {
    switch (desc.value_type) {
    case ValueType::Ipv4Address:
        return {{"type", "string"}, {"pattern", ipv4_pattern()}};
    case ValueType::PortNumber:
        return {{"type", "string"}, {"pattern", port_pattern()}};
    case ValueType::Integer:
        return {{"type", "string"}, {"pattern", "^-?[0-9]{1,18}$"}};
    case ValueType::ProtocolName:
    case ValueType::InterfaceName:
        return {{"type", "string"}, {"pattern", "^[^ ]+$"}};
    case ValueType::StringPattern:
        return {{"type", "string"}, {"pattern", "[\\s\\S]"}};
    case ValueType::Enum:
        return {{"type", "string"}, {"enum", desc.enum_values}};
    case ValueType::None:
        break;
    }
    throw Error(errc::parse_error, "capability " + desc.id + " carries no value type");
}

json range_object_schema(const CapabilityDescriptor& desc) {
    json endpoint = single_literal_schema(desc);
    return {{"type", "object"},
            {"properties",
             {{"range",
               {{"type", "array"}, {"minItems", 2}, {"maxItems", 2}, {"items", endpoint}}}}},
            {"required", {"range"}},
            {"additionalProperties", false}};
}

// All document spellings a value may take for this capability.
json value_form_schema(const CapabilityDescriptor& desc) {
    bool ranged = desc.permits(Operator::Range) && is_ordered(desc.value_type);
    json forms = json::array();
    forms.push_back(single_literal_schema(desc));
    if (ranged) {
        if (desc.value_type == ValueType::Ipv4Address)
            forms.push_back({{"type", "string"}, {"pattern", cidr_pattern()}});
        else if (desc.value_type == ValueType::PortNumber)
            forms.push_back({{"type", "string"}, {"pattern", port_span_pattern()}});
        else
            forms.push_back({{"type", "string"}, {"pattern", "^-?[0-9]{1,18}--?[0-9]{1,18}$"}});
        forms.push_back(range_object_schema(desc));
    }
    if (forms.size() == 1) return forms[0];
    return {{"anyOf", forms}};
}

json condition_schema(const CapabilityDescriptor& desc) {
    json non_regex_ops = json::array();
    if (desc.permits(Operator::ExactMatch)) non_regex_ops.push_back("EQUAL");
    if (desc.permits(Operator::NotEqualTo)) non_regex_ops.push_back("NOT_EQUAL_TO");

    json branches = json::array();
    if (!non_regex_ops.empty()) {
        json required = json::array({"capability", "values"});
        if (!desc.permits(Operator::ExactMatch))
            required.push_back("operation"); // EQUAL is the document default
        branches.push_back(
            {{"type", "object"},
             {"properties",
              {{"capability", {{"const", desc.id}}},
               {"operation", {{"enum", non_regex_ops}}},
               {"values", {{"type", "array"}, {"minItems", 1}, {"items", value_form_schema(desc)}}}}},
             {"required", required},
             {"additionalProperties", false}});
    }
    if (desc.permits(Operator::Regex)) {
        branches.push_back(
            {{"type", "object"},
             {"properties",
              {{"capability", {{"const", desc.id}}},
               {"operation", {{"const", "REGEX"}}},
               {"values",
                {{"type", "array"},
                 {"minItems", 1},
                 {"items", {{"type", "string"}, {"pattern", "[\\s\\S]"}}}}}}},
             {"required", {"capability", "operation", "values"}},
             {"additionalProperties", false}});
    }
    if (branches.size() == 1) return branches[0];
    return {{"oneOf", branches}};
}

json action_schema(const CapabilityDescriptor& desc) {
    if (desc.value_type == ValueType::None)
        return {{"type", "object"},
                {"properties", {{"capability", {{"const", desc.id}}}}},
                {"required", {"capability"}},
                {"additionalProperties", false}};
    return {{"type", "object"},
            {"properties", {{"capability", {{"const", desc.id}}}, {"value", single_literal_schema(desc)}}},
            {"required", {"capability", "value"}},
            {"additionalProperties", false}};
}

} // namespace

json emit_abstract_language(const ResolvedNsf& nsf, const Catalogue& cat) {
    std::vector<std::string> condition_caps;
    std::vector<std::string> action_caps;
    for (const auto& id : nsf.capabilities) {
        const auto& desc = cat.capability(id);
        if (desc.kind == CapabilityKind::Condition) condition_caps.push_back(id);
        else if (desc.kind == CapabilityKind::Action) action_caps.push_back(id);
    }

    json defs = json::object();
    json condition_refs = json::array();
    for (const auto& id : condition_caps) {
        defs["condition_" + id] = condition_schema(cat.capability(id));
        condition_refs.push_back({{"$ref", "#/$defs/condition_" + id}});
    }
    json action_refs = json::array();
    for (const auto& id : action_caps) {
        defs["action_" + id] = action_schema(cat.capability(id));
        action_refs.push_back({{"$ref", "#/$defs/action_" + id}});
    }

    json conditions_items = condition_refs.empty() ? json(false) : json{{"oneOf", condition_refs}};
    json actions_items = action_refs.empty() ? json(false) : json{{"oneOf", action_refs}};

    defs["rule"] = {
        {"type", "object"},
        {"properties",
         {{"id", {{"type", "string"}}},
          {"ruleType", {{"type", "string"}}},
          {"description", {{"type", "string"}}},
          {"label", {{"type", "string"}}},
          {"externalData", {{"type", "object"}, {"additionalProperties", {{"type", "string"}}}}},
          {"evaluation", {{"enum", {"AllOf", "AnyOf"}}}},
          {"conditions", {{"type", "array"}, {"items", conditions_items}}},
          {"actions", {{"type", "array"}, {"minItems", 1}, {"items", actions_items}}}}},
        {"required", {"id", "actions"}},
        {"additionalProperties", false}};

    // Default actions draw from the pool, not the whole action set.
    json default_refs = json::array();
    std::vector<std::string> pool(nsf.default_action_pool.begin(), nsf.default_action_pool.end());
    std::sort(pool.begin(), pool.end());
    for (const auto& id : pool) {
        if (!defs.contains("action_" + id)) defs["action_" + id] = action_schema(cat.capability(id));
        default_refs.push_back({{"$ref", "#/$defs/action_" + id}});
    }
    json default_schema = default_refs.empty() ? json(false) : json{{"oneOf", default_refs}};

    json schema = {
        {"$schema", "https://json-schema.org/draft/2020-12/schema"},
        {"title", nsf.id + " abstract language"},
        {"type", "object"},
        {"properties",
         {{"nsfName", {{"type", "string"}}},
          {"attributes", {{"type", "object"}, {"additionalProperties", {{"type", "string"}}}}},
          {"defaultAction", default_schema},
          {"rules", {{"type", "array"}, {"items", {{"$ref", "#/$defs/rule"}}}}}}},
        {"required", {"nsfName"}},
        {"additionalProperties", false},
        {"$defs", defs}};
    return schema;
}

std::string emit_abstract_language_text(const ResolvedNsf& nsf, const Catalogue& cat) {
    return emit_abstract_language(nsf, cat).dump(2) + "\n";
}

} // namespace capforge::mlp
