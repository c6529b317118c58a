#pragma once

#include "capforge/catalogue.hpp"

#include <json.hpp>

#include <random>
#include <vector>

namespace testsupport {

namespace catalogue = capforge::catalogue;
using nlohmann::json;
using capforge::ValueType;
using capforge::is_ordered;

// Random MLP document generator. Emits parseable documents that may still
// violate ownership, operator or value-type constraints — the mutation space
// the emitted schema is supposed to reject.
class MlpGenerator {
public:
    MlpGenerator(const catalogue::Catalogue& cat, const catalogue::ResolvedNsf& nsf, std::uint32_t seed)
        : cat_(cat), nsf_(nsf), rng_(seed) {
        for (const auto& id : cat_.capability_ids()) {
            const auto& desc = cat_.capability(id);
            if (desc.kind == catalogue::CapabilityKind::Condition) all_conditions_.push_back(id);
            if (desc.kind == catalogue::CapabilityKind::Action) all_actions_.push_back(id);
        }
        for (const auto& id : nsf_.capabilities) {
            const auto& desc = cat_.capability(id);
            if (desc.kind == catalogue::CapabilityKind::Condition) owned_conditions_.push_back(id);
            if (desc.kind == catalogue::CapabilityKind::Action) owned_actions_.push_back(id);
        }
    }

    json document() {
        json doc = {{"nsfName", nsf_.id}};
        json rules = json::array();
        int n = static_cast<int>(rng_() % 3) + (owned_actions_.empty() ? 0 : 1);
        for (int i = 0; i < n; ++i) rules.push_back(rule(i));
        doc["rules"] = rules;
        if (!nsf_.default_action_pool.empty() && chance(3)) {
            std::vector<std::string> pool(nsf_.default_action_pool.begin(), nsf_.default_action_pool.end());
            doc["defaultAction"] = action_instance(pick(chance(6) ? all_actions_ : pool));
        }
        return doc;
    }

private:
    bool chance(unsigned one_in) { return rng_() % one_in == 0; }

    const std::string& pick(const std::vector<std::string>& xs) { return xs[rng_() % xs.size()]; }

    std::string good_literal(const catalogue::CapabilityDescriptor& desc) {
        switch (desc.value_type) {
        case ValueType::Ipv4Address:
            return "10.0." + std::to_string(rng_() % 4) + "." + std::to_string(rng_() % 250);
        case ValueType::PortNumber: return std::to_string(rng_() % 65536);
        case ValueType::Integer: return std::to_string(static_cast<int>(rng_() % 1000) - 500);
        case ValueType::ProtocolName: return pick({"TCP", "UDP", "ICMP"});
        case ValueType::InterfaceName: return "eth" + std::to_string(rng_() % 4);
        case ValueType::StringPattern: return "pattern-" + std::to_string(rng_() % 100);
        case ValueType::Enum: return desc.enum_values[rng_() % desc.enum_values.size()];
        case ValueType::None: break;
        }
        return "x";
    }

    std::string bad_literal(const catalogue::CapabilityDescriptor& desc) {
        switch (desc.value_type) {
        case ValueType::Ipv4Address: return "10.0.0"; // wrong shape, stays a parseable string
        case ValueType::PortNumber: return pick({"65536", "70000", "port"});
        case ValueType::Integer: return "not-a-number";
        case ValueType::ProtocolName: return "two words";
        case ValueType::InterfaceName: return "eth 0";
        case ValueType::StringPattern: return "ok"; // no cheap invalid form
        case ValueType::Enum: return "OUT_OF_RANGE";
        case ValueType::None: break;
        }
        return "x";
    }

    json condition_instance(const std::string& cap) {
        const auto& desc = cat_.capability(cap);
        json c = {{"capability", cap}};
        bool use_regex = desc.permits(catalogue::Operator::Regex) && chance(3);
        if (use_regex) c["operation"] = "REGEX";
        else if (chance(4)) c["operation"] = "NOT_EQUAL_TO";
        else if (chance(5)) c["operation"] = "EQUAL";
        if (chance(8)) c["operation"] = pick({"EQUAL", "NOT_EQUAL_TO", "REGEX"}); // possibly illegal

        json values = json::array();
        int n = 1 + static_cast<int>(rng_() % 2);
        for (int i = 0; i < n; ++i) {
            if (!use_regex && chance(5) && is_ordered(desc.value_type)) {
                int lo = static_cast<int>(rng_() % 100);
                values.push_back(
                    json{{"range", {std::to_string(lo), std::to_string(lo + int(rng_() % 50))}}});
            } else if (use_regex) {
                values.push_back("pat-" + std::to_string(rng_() % 10));
            } else {
                values.push_back(chance(4) ? bad_literal(desc) : good_literal(desc));
            }
        }
        c["values"] = values;
        return c;
    }

    json action_instance(const std::string& cap) {
        const auto& desc = cat_.capability(cap);
        json a = {{"capability", cap}};
        bool needs_value = desc.value_type != ValueType::None;
        bool give_value = chance(10) ? !needs_value : needs_value; // occasionally wrong
        if (give_value) a["value"] = desc.value_type == ValueType::None
                                         ? "spurious"
                                         : (chance(5) ? bad_literal(desc) : good_literal(desc));
        return a;
    }

    json rule(int index) {
        json r = {{"id", "r" + std::to_string(index)}};
        if (chance(3)) r["description"] = "generated";
        if (chance(2)) r["externalData"] = {{"priority", std::to_string(index + 1)}};
        json conditions = json::array();
        int nc = static_cast<int>(rng_() % 3);
        for (int i = 0; i < nc; ++i) {
            const auto& source =
                (chance(6) || owned_conditions_.empty()) ? all_conditions_ : owned_conditions_;
            if (!source.empty()) conditions.push_back(condition_instance(pick(source)));
        }
        if (!conditions.empty()) r["conditions"] = conditions;
        json actions = json::array();
        int na = chance(12) ? 0 : 1 + static_cast<int>(rng_() % 2); // sometimes structurally invalid
        for (int i = 0; i < na; ++i) {
            const auto& source = (chance(6) || owned_actions_.empty()) ? all_actions_ : owned_actions_;
            if (!source.empty()) actions.push_back(action_instance(pick(source)));
        }
        r["actions"] = actions;
        if (chance(3)) r["evaluation"] = pick({"AllOf", "AnyOf"});
        return r;
    }

    const catalogue::Catalogue& cat_;
    const catalogue::ResolvedNsf& nsf_;
    std::mt19937 rng_;
    std::vector<std::string> all_conditions_, all_actions_;
    std::vector<std::string> owned_conditions_, owned_actions_;
};


} // namespace testsupport
