#include "capforge/mlp.hpp"

#include "capforge/docjson.hpp"
#include "capforge/errors.hpp"

#include <algorithm>
#include <regex>

namespace capforge::mlp {

using docjson::json;
using catalogue::CapabilityDescriptor;
using catalogue::CapabilityKind;
using catalogue::Catalogue;
using catalogue::Operator;
using catalogue::ResolvedNsf;

const char* to_string(Operation op) {
    switch (op) {
    case Operation::Equal: return "EQUAL";
    case Operation::NotEqualTo: return "NOT_EQUAL_TO";
    case Operation::Regex: return "REGEX";
    }
    return "EQUAL";
}

std::optional<Operation> operation_from_string(const std::string& s) {
    if (s == "EQUAL") return Operation::Equal;
    if (s == "NOT_EQUAL_TO") return Operation::NotEqualTo;
    if (s == "REGEX") return Operation::Regex;
    return std::nullopt;
}

const char* to_string(Evaluation e) { return e == Evaluation::AllOf ? "AllOf" : "AnyOf"; }

bool has_errors(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

bool schema_expressible_clean(const std::vector<Diagnostic>& diags) {
    return std::none_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
        return d.severity == Severity::Error &&
               (d.code == "ownership" || d.code == "operator" || d.code == "type" || d.code == "structure");
    });
}

// --- Parsing -----------------------------------------------------------------

namespace {

Value parse_value(const json& j, const std::string& path) {
    if (j.is_string()) return parse_value_literal(j.get<std::string>());
    if (j.is_object()) {
        docjson::reject_unknown_keys(j, {"range"}, path);
        if (!j.contains("range")) throw Error(errc::parse_error, path + ": expected \"range\" member");
        const auto& arr = docjson::require_array(j.at("range"), path + ".range");
        if (arr.size() != 2) throw Error(errc::parse_error, path + ".range: expected [lo, hi]");
        return make_range_checked(docjson::require_string(arr[0], path + ".range[0]"),
                                  docjson::require_string(arr[1], path + ".range[1]"));
    }
    throw Error(errc::parse_error, path + ": expected string or range object");
}

ConditionInstance parse_condition(const json& j, const std::string& path) {
    docjson::require_object(j, path);
    docjson::reject_unknown_keys(j, {"capability", "operation", "values"}, path);
    ConditionInstance c;
    c.capability = docjson::get_string(j, "capability", path);
    if (auto s = docjson::opt_string(j, "operation", path)) {
        auto op = operation_from_string(*s);
        if (!op) throw Error(errc::parse_error, path + ".operation: unknown operation " + *s);
        c.operation = *op;
    }
    if (!j.contains("values")) throw Error(errc::parse_error, path + ".values: missing");
    const auto& arr = docjson::require_array(j.at("values"), path + ".values");
    if (arr.empty()) throw Error(errc::parse_error, path + ".values: must be non-empty");
    for (std::size_t i = 0; i < arr.size(); ++i)
        c.values.push_back(parse_value(arr[i], docjson::index_path(path + ".values", i)));
    return c;
}

ActionInstance parse_action(const json& j, const std::string& path) {
    docjson::require_object(j, path);
    docjson::reject_unknown_keys(j, {"capability", "value"}, path);
    ActionInstance a;
    a.capability = docjson::get_string(j, "capability", path);
    a.value = docjson::opt_string(j, "value", path);
    return a;
}

MlpRule parse_rule(const json& j, const std::string& path) {
    docjson::require_object(j, path);
    docjson::reject_unknown_keys(
        j, {"id", "ruleType", "description", "label", "externalData", "conditions", "actions", "evaluation"},
        path);
    MlpRule r;
    r.id = docjson::get_string(j, "id", path);
    r.rule_type = docjson::opt_string(j, "ruleType", path);
    r.description = docjson::opt_string(j, "description", path);
    r.label = docjson::opt_string(j, "label", path);
    if (j.contains("externalData")) {
        const auto& ej = docjson::require_object(j.at("externalData"), path + ".externalData");
        for (auto it = ej.begin(); it != ej.end(); ++it)
            r.external_data[it.key()] =
                docjson::require_string(it.value(), docjson::join_path(path + ".externalData", it.key()));
    }
    if (j.contains("conditions")) {
        const auto& arr = docjson::require_array(j.at("conditions"), path + ".conditions");
        for (std::size_t i = 0; i < arr.size(); ++i)
            r.conditions.push_back(parse_condition(arr[i], docjson::index_path(path + ".conditions", i)));
    }
    if (j.contains("actions")) {
        const auto& arr = docjson::require_array(j.at("actions"), path + ".actions");
        for (std::size_t i = 0; i < arr.size(); ++i)
            r.actions.push_back(parse_action(arr[i], docjson::index_path(path + ".actions", i)));
    }
    if (auto s = docjson::opt_string(j, "evaluation", path)) {
        if (*s == "AllOf") r.evaluation = Evaluation::AllOf;
        else if (*s == "AnyOf") r.evaluation = Evaluation::AnyOf;
        else throw Error(errc::parse_error, path + ".evaluation: unknown mode " + *s);
    }
    return r;
}

} // namespace

MlpPolicy parse_mlp(const nlohmann::json& document, const std::string& origin) {
    docjson::require_object(document, origin);
    docjson::reject_unknown_keys(document, {"nsfName", "attributes", "rules", "defaultAction"}, origin);
    MlpPolicy p;
    p.nsf_name = docjson::get_string(document, "nsfName", origin);
    if (document.contains("attributes")) {
        const auto& aj = docjson::require_object(document.at("attributes"), origin + ".attributes");
        for (auto it = aj.begin(); it != aj.end(); ++it)
            p.policy_attributes[it.key()] =
                docjson::require_string(it.value(), docjson::join_path(origin + ".attributes", it.key()));
    }
    if (document.contains("rules")) {
        const auto& arr = docjson::require_array(document.at("rules"), origin + ".rules");
        for (std::size_t i = 0; i < arr.size(); ++i)
            p.rules.push_back(parse_rule(arr[i], docjson::index_path(origin + ".rules", i)));
    }
    if (document.contains("defaultAction")) {
        const auto& dj = docjson::require_object(document.at("defaultAction"), origin + ".defaultAction");
        docjson::reject_unknown_keys(dj, {"capability", "value"}, origin + ".defaultAction");
        DefaultAction d;
        d.capability = docjson::get_string(dj, "capability", origin + ".defaultAction");
        d.value = docjson::opt_string(dj, "value", origin + ".defaultAction");
        p.default_action = std::move(d);
    }
    return p;
}

MlpPolicy parse_mlp_file(const std::string& path) { return parse_mlp(docjson::load_file(path), path); }

namespace {

json value_to_json(const Value& v) {
    if (auto* s = std::get_if<SingleValue>(&v)) return s->literal;
    const auto& r = std::get<RangeValue>(v);
    if (r.spelling) return *r.spelling;
    return json{{"range", {r.lo, r.hi}}};
}

} // namespace

nlohmann::json to_document(const MlpPolicy& policy) {
    json doc = json::object();
    doc["nsfName"] = policy.nsf_name;
    if (!policy.policy_attributes.empty()) doc["attributes"] = policy.policy_attributes;
    json rules = json::array();
    for (const auto& r : policy.rules) {
        json rj = json::object();
        rj["id"] = r.id;
        if (r.rule_type) rj["ruleType"] = *r.rule_type;
        if (r.description) rj["description"] = *r.description;
        if (r.label) rj["label"] = *r.label;
        if (!r.external_data.empty()) rj["externalData"] = r.external_data;
        if (!r.conditions.empty()) {
            json cs = json::array();
            for (const auto& c : r.conditions) {
                json cj = {{"capability", c.capability}, {"operation", to_string(c.operation)}};
                json vs = json::array();
                for (const auto& v : c.values) vs.push_back(value_to_json(v));
                cj["values"] = vs;
                cs.push_back(cj);
            }
            rj["conditions"] = cs;
        }
        json as = json::array();
        for (const auto& a : r.actions) {
            json aj = {{"capability", a.capability}};
            if (a.value) aj["value"] = *a.value;
            as.push_back(aj);
        }
        rj["actions"] = as;
        rj["evaluation"] = to_string(r.evaluation);
        rules.push_back(rj);
    }
    doc["rules"] = rules;
    if (policy.default_action) {
        json dj = {{"capability", policy.default_action->capability}};
        if (policy.default_action->value) dj["value"] = *policy.default_action->value;
        doc["defaultAction"] = dj;
    }
    return doc;
}

// --- Validation ----------------------------------------------------------------

namespace {

bool literal_ok(const std::string& literal, const CapabilityDescriptor& desc) {
    if (!literal_conforms(literal, desc.value_type)) return false;
    if (desc.value_type == ValueType::Enum)
        return std::find(desc.enum_values.begin(), desc.enum_values.end(), literal) !=
               desc.enum_values.end();
    return true;
}

bool regex_compiles(const std::string& pattern) {
    try {
        std::regex re(pattern, std::regex::ECMAScript);
        return true;
    } catch (const std::regex_error&) {
        return false;
    }
}

void check_condition(const ConditionInstance& c, const MlpRule& rule, const ResolvedNsf& nsf,
                     const Catalogue& cat, std::vector<Diagnostic>& out) {
    if (!nsf.owns(c.capability)) {
        out.push_back({Severity::Error, "ownership", rule.id, c.capability,
                       "capability " + c.capability + " is not owned by " + nsf.id});
        return;
    }
    const auto* desc = cat.find_capability(c.capability);
    if (!desc || desc->kind != CapabilityKind::Condition) {
        out.push_back({Severity::Error, "ownership", rule.id, c.capability,
                       c.capability + " is not a condition capability"});
        return;
    }
    Operator needed = c.operation == Operation::Equal      ? Operator::ExactMatch
                      : c.operation == Operation::NotEqualTo ? Operator::NotEqualTo
                                                             : Operator::Regex;
    if (!desc->permits(needed))
        out.push_back({Severity::Error, "operator", rule.id, c.capability,
                       std::string(to_string(c.operation)) + " is not permitted on " + c.capability});
    for (const auto& v : c.values) {
        if (auto* s = std::get_if<SingleValue>(&v)) {
            if (c.operation == Operation::Regex) {
                if (!regex_compiles(s->literal))
                    out.push_back({Severity::Error, "type", rule.id, c.capability,
                                   "value does not compile as a regex: " + s->literal});
            } else if (!literal_ok(s->literal, *desc)) {
                out.push_back({Severity::Error, "type", rule.id, c.capability,
                               "value \"" + s->literal + "\" does not conform to " +
                                   to_string(desc->value_type)});
            }
        } else {
            const auto& r = std::get<RangeValue>(v);
            if (!desc->permits(Operator::Range))
                out.push_back({Severity::Error, "operator", rule.id, c.capability,
                               "range values are not permitted on " + c.capability});
            else if (!is_ordered(desc->value_type))
                out.push_back({Severity::Error, "operator", rule.id, c.capability,
                               "range values need an ordered value type"});
            else if (!literal_ok(r.lo, *desc) || !literal_ok(r.hi, *desc))
                out.push_back({Severity::Error, "type", rule.id, c.capability,
                               std::string("range endpoints do not conform to ") +
                                   to_string(desc->value_type)});
        }
    }
}

void check_action(const ActionInstance& a, const std::string& rule_id, const ResolvedNsf& nsf,
                  const Catalogue& cat, std::vector<Diagnostic>& out) {
    if (!nsf.owns(a.capability)) {
        out.push_back({Severity::Error, "ownership", rule_id, a.capability,
                       "capability " + a.capability + " is not owned by " + nsf.id});
        return;
    }
    const auto* desc = cat.find_capability(a.capability);
    if (!desc || desc->kind != CapabilityKind::Action) {
        out.push_back({Severity::Error, "ownership", rule_id, a.capability,
                       a.capability + " is not an action capability"});
        return;
    }
    if (desc->value_type == ValueType::None) {
        if (a.value)
            out.push_back({Severity::Error, "type", rule_id, a.capability,
                           a.capability + " takes no value"});
    } else if (!a.value) {
        out.push_back({Severity::Error, "type", rule_id, a.capability,
                       a.capability + " requires a value"});
    } else if (!literal_ok(*a.value, *desc)) {
        out.push_back({Severity::Error, "type", rule_id, a.capability,
                       "value \"" + *a.value + "\" does not conform to " + to_string(desc->value_type)});
    }
}

} // namespace

std::vector<Diagnostic> validate_mlp(const MlpPolicy& policy, const ResolvedNsf& nsf,
                                     const Catalogue& cat) {
    std::vector<Diagnostic> out;

    if (policy.nsf_name != nsf.id)
        out.push_back({Severity::Warning, "ownership", "", "",
                       "policy targets " + policy.nsf_name + ", validated against " + nsf.id});

    for (const auto& rule : policy.rules) {
        if (rule.actions.empty())
            out.push_back({Severity::Error, "structure", rule.id, "", "rule has no actions"});

        for (const auto& c : rule.conditions) check_condition(c, rule, nsf, cat, out);
        for (const auto& a : rule.actions) check_action(a, rule.id, nsf, cat, out);

        if (nsf.strategy_details)
            for (const auto& spec : nsf.strategy_details->required_external_data) {
                auto it = rule.external_data.find(spec.name);
                if (it == rule.external_data.end())
                    out.push_back({Severity::Error, "external", rule.id, "",
                                   "missing external data \"" + spec.name + "\" required by " +
                                       *nsf.resolution_strategy});
                else if (!literal_conforms(it->second, spec.value_type))
                    out.push_back({Severity::Error, "external", rule.id, "",
                                   "external data \"" + spec.name + "\" is not a valid " +
                                       to_string(spec.value_type)});
            }

        if (nsf.policy_details)
            for (const auto& mand : nsf.policy_details->mandatory_capabilities) {
                bool present =
                    std::any_of(rule.conditions.begin(), rule.conditions.end(),
                                [&](const ConditionInstance& c) { return c.capability == mand; }) ||
                    std::any_of(rule.actions.begin(), rule.actions.end(),
                                [&](const ActionInstance& a) { return a.capability == mand; });
                if (!present)
                    out.push_back({Severity::Error, "mandatory", rule.id, mand,
                                   "mandatory capability absent: " + mand});
            }

        // Dependency targets should precede their dependents in document order
        // (some targets, e.g. `-p`, must be emitted first).
        for (std::size_t i = 0; i < rule.conditions.size(); ++i) {
            const auto* det = nsf.details_for(rule.conditions[i].capability);
            if (!det) continue;
            for (const auto& dep : det->dependencies) {
                if (dep.mode != catalogue::DependencyMode::Presence) continue;
                for (std::size_t k = i + 1; k < rule.conditions.size(); ++k)
                    if (rule.conditions[k].capability == dep.of_capability)
                        out.push_back({Severity::Warning, "dependency-order", rule.id,
                                       rule.conditions[i].capability,
                                       dep.of_capability + " appears after its dependent " +
                                           rule.conditions[i].capability});
            }
        }
    }

    if (policy.default_action) {
        if (!nsf.default_action_pool.count(policy.default_action->capability))
            out.push_back({Severity::Error, "ownership", "", policy.default_action->capability,
                           "default action " + policy.default_action->capability +
                               " is not in the default action pool of " + nsf.id});
        else {
            ActionInstance as_action{policy.default_action->capability, policy.default_action->value};
            check_action(as_action, "", nsf, cat, out);
        }
    }

    if (nsf.policy_details)
        for (const auto& attr : nsf.policy_details->policy_attributes)
            if (!policy.policy_attributes.count(attr.attribute_name))
                out.push_back({Severity::Error, "attributes", "", "",
                               "policy attribute \"" + attr.attribute_name + "\" is required by " + nsf.id});

    return out;
}

// --- Match oracle ----------------------------------------------------------------

bool matches(const ConditionInstance& condition, const Packet& packet, const Catalogue& cat) {
    auto it = packet.attributes.find(condition.capability);
    if (it == packet.attributes.end())
        throw Error(errc::missing_attribute,
                    "packet assigns no value for " + condition.capability, condition.capability);
    const std::string& pv = it->second;
    const auto& desc = cat.capability(condition.capability);

    switch (condition.operation) {
    case Operation::Equal:
        return std::any_of(condition.values.begin(), condition.values.end(),
                           [&](const Value& v) { return value_matches(pv, v, desc.value_type); });
    case Operation::NotEqualTo:
        return std::all_of(condition.values.begin(), condition.values.end(),
                           [&](const Value& v) { return !value_matches(pv, v, desc.value_type); });
    case Operation::Regex:
        return std::any_of(condition.values.begin(), condition.values.end(), [&](const Value& v) {
            const auto* s = std::get_if<SingleValue>(&v);
            if (!s) return false;
            try {
                std::regex re(s->literal, std::regex::ECMAScript);
                return std::regex_search(pv, re);
            } catch (const std::regex_error&) {
                return false;
            }
        });
    }
    return false;
}

bool match_rule(const MlpRule& rule, const Packet& packet, const Catalogue& cat) {
    if (rule.conditions.empty()) return true; // a rule with no conditions applies to all traffic
    if (rule.evaluation == Evaluation::AllOf)
        return std::all_of(rule.conditions.begin(), rule.conditions.end(),
                           [&](const ConditionInstance& c) { return matches(c, packet, cat); });
    return std::any_of(rule.conditions.begin(), rule.conditions.end(),
                       [&](const ConditionInstance& c) { return matches(c, packet, cat); });
}

std::vector<std::size_t> enforcement_order(const MlpPolicy& policy,
                                           const std::optional<catalogue::ResolutionStrategyDetails>& strategy) {
    std::vector<std::size_t> order(policy.rules.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (!strategy || strategy->required_external_data.empty()) return order;

    const std::string& key = strategy->required_external_data.front().name;
    auto value_of = [&](std::size_t i) -> long long {
        auto it = policy.rules[i].external_data.find(key);
        if (it == policy.rules[i].external_data.end())
            throw Error(errc::missing_attribute,
                        "rule " + policy.rules[i].id + " lacks external data \"" + key + "\"");
        try {
            return std::stoll(it->second);
        } catch (...) {
            throw Error(errc::type_error, "rule " + policy.rules[i].id + ": external data \"" + key +
                                              "\" is not an integer");
        }
    };
    bool ascending = strategy->ordering == catalogue::Ordering::Ascending;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ascending ? value_of(a) < value_of(b) : value_of(a) > value_of(b);
    });
    return order;
}

MatchOutcome match_policy(const MlpPolicy& policy, const Packet& packet, const Catalogue& cat,
                          const std::optional<catalogue::ResolutionStrategyDetails>& strategy) {
    for (std::size_t i : enforcement_order(policy, strategy)) {
        const auto& rule = policy.rules[i];
        if (match_rule(rule, packet, cat)) {
            MatchOutcome out;
            out.decided = true;
            out.actions = rule.actions;
            out.rule_id = rule.id;
            return out;
        }
    }
    if (policy.default_action) {
        MatchOutcome out;
        out.decided = true;
        out.default_action_used = true;
        out.actions.push_back(ActionInstance{policy.default_action->capability, policy.default_action->value});
        return out;
    }
    return {}; // NoDecision
}

std::set<std::string> used_capabilities(const MlpPolicy& policy) {
    std::set<std::string> out;
    for (const auto& r : policy.rules) {
        for (const auto& c : r.conditions) out.insert(c.capability);
        for (const auto& a : r.actions) out.insert(a.capability);
    }
    if (policy.default_action) out.insert(policy.default_action->capability);
    return out;
}

} // namespace capforge::mlp

namespace capforge::catalogue {

std::vector<std::string> enforcers(const Catalogue& cat, const mlp::MlpPolicy& policy) {
    auto needed = mlp::used_capabilities(policy);
    std::vector<std::string> out;
    for (const auto& nsf_id : cat.nsf_ids()) {
        auto r = cat.resolve(nsf_id);
        bool owns_all = std::all_of(needed.begin(), needed.end(),
                                    [&](const std::string& c) { return r.owns(c); });
        if (!owns_all) continue;
        // The NSF's resolution strategy must find its external data in every rule.
        bool external_ok = true;
        if (r.strategy_details)
            for (const auto& rule : policy.rules)
                for (const auto& spec : r.strategy_details->required_external_data)
                    if (!rule.external_data.count(spec.name)) external_ok = false;
        if (external_ok) out.push_back(nsf_id);
    }
    return out;
}

} // namespace capforge::catalogue
