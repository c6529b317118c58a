#include "capforge/translator.hpp"

#include "capforge/errors.hpp"

#include <algorithm>
#include <optional>

namespace capforge::translator {

using catalogue::CapabilityKind;
using catalogue::Catalogue;
using catalogue::Dependency;
using catalogue::DependencyMode;
using catalogue::MergeGroup;
using catalogue::PreferredExpansion;
using catalogue::ResolvedNsf;
using catalogue::TranslationDetails;
using mlp::ActionInstance;
using mlp::ConditionInstance;
using mlp::Evaluation;
using mlp::MlpPolicy;
using mlp::MlpRule;
using mlp::Operation;

namespace {

bool condition_matches(const catalogue::CommandNameCondition& cond,
                       const std::map<std::string, std::string>& attrs) {
    auto it = attrs.find(cond.attribute_name);
    return it != attrs.end() && it->second == cond.attribute_value;
}

std::string pick_from(const std::vector<catalogue::CommandName>& names,
                      const std::map<std::string, std::string>& attrs, bool* found) {
    for (const auto& n : names)
        if (n.condition && condition_matches(*n.condition, attrs)) {
            *found = true;
            return n.real_command_name;
        }
    for (const auto& n : names)
        if (!n.condition) {
            *found = true;
            return n.real_command_name;
        }
    *found = false;
    return {};
}

// ${attr:NAME} placeholders pull from the merged policy attributes.
std::string substitute_attributes(const std::string& text,
                                  const std::map<std::string, std::string>& attributes) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto open = text.find("${attr:", pos);
        if (open == std::string::npos) {
            out += text.substr(pos);
            break;
        }
        out += text.substr(pos, open - pos);
        auto close = text.find('}', open);
        if (close == std::string::npos)
            throw Error(errc::parse_error, "unterminated attribute placeholder in \"" + text + "\"");
        std::string name = text.substr(open + 7, close - open - 7);
        auto it = attributes.find(name);
        if (it == attributes.end())
            throw Error(errc::missing_attribute, "attribute \"" + name + "\" is required for translation",
                        name);
        out += it->second;
        pos = close + 1;
    }
    return out;
}

std::string render_value(const Value& v, const TranslationDetails& details) {
    if (auto* s = std::get_if<SingleValue>(&v)) return s->literal;
    const auto& r = std::get<RangeValue>(v);
    if (r.spelling) return *r.spelling; // CIDR stays CIDR in the output
    return r.lo + details.range_separator + r.hi;
}

std::string render_value_body(const std::vector<Value>& values, const TranslationDetails& details,
                              bool joining) {
    if (values.empty()) return {};
    std::string out = render_value(values.front(), details);
    for (std::size_t i = 1; i < values.size(); ++i) {
        out += joining && details.body_concatenator ? details.body_concatenator->real_concatenator : " ";
        out += render_value(values[i], details);
    }
    return out;
}

bool dependency_satisfied(const Dependency& dep, const MlpRule& rule, const Catalogue& cat) {
    bool present = false;
    bool value_ok = dep.required_value.empty();
    auto check_values = [&](const std::vector<Value>& values, ValueType type) {
        for (const auto& req : dep.required_value)
            for (const auto& v : values)
                if (value_matches(req, v, type)) value_ok = true;
    };
    for (const auto& c : rule.conditions) {
        if (c.capability != dep.of_capability) continue;
        present = true;
        if (c.operation == Operation::Equal && !dep.required_value.empty())
            check_values(c.values, cat.capability(c.capability).value_type);
    }
    for (const auto& a : rule.actions) {
        if (a.capability != dep.of_capability) continue;
        present = true;
        if (a.value && !dep.required_value.empty())
            for (const auto& req : dep.required_value)
                if (*a.value == req) value_ok = true;
    }
    if (dep.mode == DependencyMode::Absence) return !present;
    return present && value_ok;
}

// Checks every dependency of every instantiated capability; when
// auto-satisfy applies, returns the rule with injected conditions instead.
MlpRule enforce_dependencies(const MlpRule& rule, const ResolvedNsf& nsf, const Catalogue& cat,
                             const TranslateOptions& options) {
    MlpRule current = rule;
    bool injected = true;
    while (injected) {
        injected = false;
        std::vector<std::string> used;
        for (const auto& c : current.conditions) used.push_back(c.capability);
        for (const auto& a : current.actions) used.push_back(a.capability);
        for (const auto& cap : used) {
            const auto* det = nsf.details_for(cap);
            if (!det) continue;
            for (const auto& dep : det->dependencies) {
                if (dependency_satisfied(dep, current, cat)) continue;
                bool absent = std::none_of(current.conditions.begin(), current.conditions.end(),
                                           [&](const ConditionInstance& c) {
                                               return c.capability == dep.of_capability;
                                           }) &&
                              std::none_of(current.actions.begin(), current.actions.end(),
                                           [&](const ActionInstance& a) {
                                               return a.capability == dep.of_capability;
                                           });
                if (options.auto_satisfy && dep.mode == DependencyMode::Presence &&
                    dep.required_value.size() == 1 && absent) {
                    // Injected targets go first so they precede their dependents.
                    ConditionInstance inj;
                    inj.capability = dep.of_capability;
                    inj.operation = Operation::Equal;
                    inj.values.push_back(SingleValue{dep.required_value.front()});
                    current.conditions.insert(current.conditions.begin(), inj);
                    injected = true;
                    break;
                }
                throw Error(errc::dependency_violation,
                            "rule " + current.id + ": " + cap + " " + dep.describe(),
                            dep.of_capability);
            }
            if (injected) break;
        }
    }
    return current;
}

} // namespace

std::string select_command_name(const std::map<std::string, std::string>& instance_attributes,
                                const TranslationDetails& details, bool joining) {
    bool found = false;
    if (joining && details.body_concatenator && !details.body_concatenator->new_command_names.empty()) {
        std::string name = pick_from(details.body_concatenator->new_command_names, instance_attributes, &found);
        if (found) return name;
    }
    std::string name = pick_from(details.command_names, instance_attributes, &found);
    if (!found)
        throw Error(errc::no_applicable_command_name,
                    "no applicable command name for " + details.capability);
    return name;
}

ExpansionPlan plan_expansion(const MlpRule& rule, const ResolvedNsf& nsf) {
    ExpansionPlan plan;
    plan.decisions.reserve(rule.conditions.size());
    for (const auto& c : rule.conditions) {
        const auto* det = nsf.details_for(c.capability);
        bool multi = c.values.size() > 1;
        bool has_concat = det && det->body_concatenator.has_value();
        auto preferred = det ? det->preferred_expansion : PreferredExpansion::Auto;

        Decision d = Decision::InlineJoin;
        if (multi) {
            if (c.operation == Operation::NotEqualTo) {
                // Splitting a negated union across rules would OR the negations.
                if (has_concat && preferred != PreferredExpansion::Always) d = Decision::InlineJoin;
                else if (preferred != PreferredExpansion::Never) d = Decision::RepeatConjunction;
                else
                    throw Error(errc::unsatisfiable_negated_union,
                                "rule " + rule.id + ": negated union on " + c.capability +
                                    " cannot be joined and the capability may not repeat",
                                c.capability);
            } else {
                d = (has_concat && preferred != PreferredExpansion::Always) ? Decision::InlineJoin
                                                                            : Decision::Expand;
            }
        }
        plan.decisions.push_back(d);
        if (d == Decision::Expand) plan.expected_rule_count *= c.values.size();
    }
    return plan;
}

std::vector<MlpRule> expand_rule(const MlpRule& rule, const ExpansionPlan& plan) {
    std::vector<std::size_t> expanded_idx;
    for (std::size_t i = 0; i < rule.conditions.size(); ++i)
        if (plan.decisions[i] == Decision::Expand && rule.conditions[i].values.size() > 1)
            expanded_idx.push_back(i);

    std::vector<MlpRule> out;
    std::vector<std::size_t> odometer(expanded_idx.size(), 0);
    while (true) {
        MlpRule frag = rule;
        frag.conditions.clear();
        for (std::size_t i = 0; i < rule.conditions.size(); ++i) {
            const auto& c = rule.conditions[i];
            auto pos = std::find(expanded_idx.begin(), expanded_idx.end(), i);
            if (pos != expanded_idx.end()) {
                ConditionInstance single = c;
                single.values = {c.values[odometer[pos - expanded_idx.begin()]]};
                frag.conditions.push_back(std::move(single));
            } else if (plan.decisions[i] == Decision::RepeatConjunction && c.values.size() > 1) {
                // ¬(a ∨ b) = ¬a ∧ ¬b: one single-valued negation per value.
                for (const auto& v : c.values) {
                    ConditionInstance single = c;
                    single.values = {v};
                    frag.conditions.push_back(std::move(single));
                }
            } else {
                frag.conditions.push_back(c);
            }
        }
        out.push_back(std::move(frag));

        // Advance, last expanded condition fastest.
        std::size_t k = odometer.size();
        while (k > 0) {
            --k;
            if (++odometer[k] < rule.conditions[expanded_idx[k]].values.size()) break;
            odometer[k] = 0;
            if (k == 0) return out;
        }
        if (odometer.empty()) return out;
    }
}

namespace {

std::string render_instance_token(const std::string& command, const std::string& body,
                                  const TranslationDetails& details,
                                  const std::map<std::string, std::string>& attributes) {
    std::string text = substitute_attributes(command, attributes);
    if (!body.empty()) {
        text += details.value_separator;
        text += substitute_attributes(details.prefix, attributes);
        text += body;
        text += substitute_attributes(details.suffix, attributes);
    }
    return text;
}

const TranslationDetails& require_details(const ResolvedNsf& nsf, const std::string& capability) {
    const auto* det = nsf.details_for(capability);
    if (!det)
        throw Error(errc::no_applicable_command_name,
                    nsf.id + " has no translation details for " + capability, capability);
    return *det;
}

// One LLC line for a rule fragment. Fragments reach this point with expanded
// conditions already single-valued, so any remaining multi-value condition is
// an inline join.
std::string render_rule_line(const MlpRule& rule, const ResolvedNsf& nsf,
                             const std::map<std::string, std::string>& attributes) {
    const auto& policy_details = *nsf.policy_details;

    // Merge groups: members collapse into one templated token at the first
    // member's slot.
    struct GroupState {
        std::vector<std::string> slot_bodies;
        std::string template_text;
        std::string emit_once_prefix;
        std::size_t first_position = 0;
        std::set<std::string> members_present;
        std::set<std::string> members_expected;
    };
    std::map<std::string, GroupState> groups;
    std::map<std::string, const MergeGroup*> group_by_cap;
    for (const auto& cap : nsf.capabilities) {
        const auto* det = nsf.details_for(cap);
        if (det && det->merge_group) group_by_cap[cap] = &*det->merge_group;
    }

    std::vector<std::string> valued_actions;
    std::vector<std::string> conditions;
    std::vector<std::string> bare_actions;

    // Command-name conditions can match the instance operation, the rendering
    // context, or any policy attribute (e.g. a chain-dependent flag).
    auto instance_attrs = [&attributes](const char* operation) {
        std::map<std::string, std::string> attrs = attributes;
        if (operation) attrs["operation"] = operation;
        attrs["context"] = "rule";
        return attrs;
    };

    for (const auto& a : rule.actions) {
        const auto& det = require_details(nsf, a.capability);
        auto attrs = instance_attrs(nullptr);
        std::string command = select_command_name(attrs, det, false);
        std::string body = a.value.value_or("");
        std::string token = render_instance_token(command, body, det, attributes);
        if (a.value) valued_actions.push_back(std::move(token));
        else bare_actions.push_back(std::move(token));
    }

    for (std::size_t i = 0; i < rule.conditions.size(); ++i) {
        const auto& c = rule.conditions[i];
        const auto& det = require_details(nsf, c.capability);

        bool joining = c.values.size() > 1;
        std::string body = render_value_body(c.values, det, joining);

        if (auto it = group_by_cap.find(c.capability); it != group_by_cap.end()) {
            auto& g = groups[it->second->group_id];
            if (g.members_expected.empty()) {
                for (const auto& [cap, mg] : group_by_cap)
                    if (mg->group_id == it->second->group_id) g.members_expected.insert(cap);
                g.first_position = conditions.size();
                conditions.emplace_back(); // placeholder, filled after the scan
            }
            g.members_present.insert(c.capability);
            if (static_cast<std::size_t>(it->second->slot) > g.slot_bodies.size())
                g.slot_bodies.resize(it->second->slot);
            g.slot_bodies[it->second->slot - 1] = body;
            if (!it->second->template_text.empty()) g.template_text = it->second->template_text;
            if (!it->second->emit_once_prefix.empty()) g.emit_once_prefix = it->second->emit_once_prefix;
            continue;
        }

        auto attrs = instance_attrs(mlp::to_string(c.operation));
        std::string command = select_command_name(attrs, det, joining);
        conditions.push_back(render_instance_token(command, body, det, attributes));
    }

    for (auto& [gid, g] : groups) {
        std::vector<std::string> missing;
        std::set_difference(g.members_expected.begin(), g.members_expected.end(),
                            g.members_present.begin(), g.members_present.end(),
                            std::back_inserter(missing));
        if (!missing.empty()) {
            std::string names;
            for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
            throw Error(errc::incomplete_merge_group,
                        "rule " + rule.id + ": merge group " + gid + " is missing " + names, names);
        }
        std::string text = g.template_text;
        for (std::size_t slot = 0; slot < g.slot_bodies.size(); ++slot) {
            std::string marker = "{" + std::to_string(slot + 1) + "}";
            for (std::size_t at = text.find(marker); at != std::string::npos; at = text.find(marker))
                text.replace(at, marker.size(), g.slot_bodies[slot]);
        }
        if (!g.emit_once_prefix.empty()) text = g.emit_once_prefix + " " + text;
        conditions[g.first_position] = substitute_attributes(text, attributes);
    }

    std::vector<std::string> parts;
    if (!policy_details.rule_start.empty())
        parts.push_back(substitute_attributes(policy_details.rule_start, attributes));
    for (auto& t : valued_actions) parts.push_back(std::move(t));
    for (auto& t : conditions)
        if (!t.empty()) parts.push_back(std::move(t));
    for (auto& t : bare_actions) parts.push_back(std::move(t));
    if (!policy_details.rule_end.empty())
        parts.push_back(substitute_attributes(policy_details.rule_end, attributes));

    std::string line;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) line += " ";
        line += parts[i];
    }
    return line;
}

} // namespace

std::string translate(const MlpPolicy& policy, const ResolvedNsf& nsf, const Catalogue& cat,
                      const std::map<std::string, std::string>& attributes,
                      const TranslateOptions& options) {
    if (!nsf.policy_details)
        throw Error(errc::invalid_policy, nsf.id + " has no policy details; it cannot be translated");
    const auto& policy_details = *nsf.policy_details;

    std::map<std::string, std::string> merged = policy.policy_attributes;
    for (const auto& [k, v] : attributes) merged[k] = v; // caller overrides the document
    for (const auto& spec : policy_details.policy_attributes)
        if (!merged.count(spec.attribute_name))
            throw Error(errc::missing_attribute,
                        "policy attribute \"" + spec.attribute_name + "\" is required by " + nsf.id,
                        spec.attribute_name);

    std::vector<std::string> lines;
    for (std::size_t index : mlp::enforcement_order(policy, nsf.strategy_details)) {
        const MlpRule& original = policy.rules[index];

        for (const auto& mand : policy_details.mandatory_capabilities) {
            bool present = std::any_of(original.conditions.begin(), original.conditions.end(),
                                       [&](const ConditionInstance& c) { return c.capability == mand; }) ||
                           std::any_of(original.actions.begin(), original.actions.end(),
                                       [&](const ActionInstance& a) { return a.capability == mand; });
            if (!present)
                throw Error(errc::mandatory_capability_absent,
                            "rule " + original.id + ": mandatory capability absent: " + mand, mand);
        }

        MlpRule checked = enforce_dependencies(original, nsf, cat, options);

        // AnyOf distributes over the rule set: one fragment per condition,
        // identical actions, shared priority.
        std::vector<MlpRule> disjuncts;
        if (checked.evaluation == Evaluation::AnyOf && checked.conditions.size() > 1) {
            for (const auto& c : checked.conditions) {
                MlpRule frag = checked;
                frag.evaluation = Evaluation::AllOf;
                frag.conditions = {c};
                disjuncts.push_back(std::move(frag));
            }
        } else {
            disjuncts.push_back(std::move(checked));
        }

        for (const auto& d : disjuncts) {
            ExpansionPlan plan = plan_expansion(d, nsf);
            for (const auto& frag : expand_rule(d, plan))
                lines.push_back(render_rule_line(frag, nsf, merged));
        }
    }

    if (policy.default_action) {
        const auto& det = require_details(nsf, policy.default_action->capability);
        std::map<std::string, std::string> attrs = merged;
        attrs["context"] = "defaultAction";
        std::string command = select_command_name(attrs, det, false);
        std::string body = policy.default_action->value.value_or("");
        std::string token = render_instance_token(command, body, det, merged);
        std::string line = policy_details.rule_start.empty()
                               ? token
                               : substitute_attributes(policy_details.rule_start, merged) + " " + token;
        lines.push_back(std::move(line));
    }

    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += "\n";
    }
    if (!policy_details.policy_trailer.empty()) {
        out += substitute_attributes(policy_details.policy_trailer, merged);
        out += "\n";
    }

    if (policy_details.policy_encoding == "ascii")
        for (unsigned char ch : out)
            if (ch > 0x7F)
                throw Error(errc::type_error, "LLC contains non-ASCII bytes but " + nsf.id +
                                                  " policies are ascii-encoded");
    return out;
}

} // namespace capforge::translator
