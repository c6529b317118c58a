#include "capforge/catalogue.hpp"

#include "capforge/docjson.hpp"
#include "capforge/errors.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <functional>
#include <regex>

namespace capforge::catalogue {

using docjson::json;

const char* to_string(CapabilityKind k) {
    switch (k) {
    case CapabilityKind::Condition: return "Condition";
    case CapabilityKind::Action: return "Action";
    case CapabilityKind::Event: return "Event";
    case CapabilityKind::Evaluation: return "Evaluation";
    case CapabilityKind::ResolutionStrategy: return "ResolutionStrategy";
    case CapabilityKind::DefaultAction: return "DefaultAction";
    }
    return "Condition";
}

std::optional<CapabilityKind> capability_kind_from_string(const std::string& s) {
    if (s == "Condition") return CapabilityKind::Condition;
    if (s == "Action") return CapabilityKind::Action;
    if (s == "Event") return CapabilityKind::Event;
    if (s == "Evaluation") return CapabilityKind::Evaluation;
    if (s == "ResolutionStrategy") return CapabilityKind::ResolutionStrategy;
    if (s == "DefaultAction") return CapabilityKind::DefaultAction;
    return std::nullopt;
}

const char* to_string(Operator op) {
    switch (op) {
    case Operator::ExactMatch: return "exactMatch";
    case Operator::NotEqualTo: return "notEqualTo";
    case Operator::Range: return "range";
    case Operator::Regex: return "regex";
    }
    return "exactMatch";
}

std::optional<Operator> operator_from_string(const std::string& s) {
    if (s == "exactMatch") return Operator::ExactMatch;
    if (s == "notEqualTo") return Operator::NotEqualTo;
    if (s == "range") return Operator::Range;
    if (s == "regex") return Operator::Regex;
    return std::nullopt;
}

const char* to_string(PreferredExpansion p) {
    switch (p) {
    case PreferredExpansion::Auto: return "auto";
    case PreferredExpansion::Always: return "always";
    case PreferredExpansion::Never: return "never";
    }
    return "auto";
}

const char* to_string(Relation r) {
    switch (r) {
    case Relation::Equivalent: return "Equivalent";
    case Relation::Disjoint: return "Disjoint";
    case Relation::ProperSubsetAofB: return "ProperSubsetAofB";
    case Relation::ProperSubsetBofA: return "ProperSubsetBofA";
    case Relation::Overlapping: return "Overlapping";
    }
    return "Disjoint";
}

std::string Dependency::describe() const {
    std::string out = mode == DependencyMode::Presence ? "requires presence of " : "requires absence of ";
    out += of_capability;
    if (!required_value.empty()) {
        out += " with value in {";
        for (std::size_t i = 0; i < required_value.size(); ++i) {
            if (i) out += ", ";
            out += required_value[i];
        }
        out += "}";
    }
    return out;
}

const TranslationDetails* ResolvedNsf::details_for(const std::string& capability_id) const {
    auto it = translation_details.find(capability_id);
    return it == translation_details.end() ? nullptr : &it->second;
}

namespace {

bool recognized_encoding(const std::string& e) { return e == "ascii" || e == "utf-8"; }

void validate_capability(const CapabilityDescriptor& c) {
    if (c.id.empty()) throw Error(errc::parse_error, "capability with empty id");
    bool is_condition = c.kind == CapabilityKind::Condition;
    if (is_condition && c.operators.empty())
        throw Error(errc::parse_error, "condition capability " + c.id + " has no operators");
    if (!is_condition && !c.operators.empty())
        throw Error(errc::parse_error, "non-condition capability " + c.id + " declares operators");
    if (c.value_type == ValueType::None && !c.operators.empty())
        throw Error(errc::parse_error, "capability " + c.id + " has value type none but operators");
    if (c.value_type == ValueType::Enum && c.enum_values.empty())
        throw Error(errc::parse_error, "enum capability " + c.id + " lists no enumValues");
    if (c.value_type != ValueType::Enum && !c.enum_values.empty())
        throw Error(errc::parse_error, "capability " + c.id + " lists enumValues for a non-enum type");
}

// Include cycle detection; on a back edge the cycle node list is reported.
void check_include_cycles(const std::map<std::string, NsfDescriptor>& nsfs) {
    enum class Mark { White, Grey, Black };
    std::map<std::string, Mark> marks;
    std::vector<std::string> stack;

    std::function<void(const std::string&)> visit = [&](const std::string& id) {
        marks[id] = Mark::Grey;
        stack.push_back(id);
        for (const auto& inc : nsfs.at(id).includes) {
            auto m = marks.find(inc);
            if (m != marks.end() && m->second == Mark::Grey) {
                auto at = std::find(stack.begin(), stack.end(), inc);
                std::string cycle;
                for (auto it = at; it != stack.end(); ++it) {
                    if (!cycle.empty()) cycle += " -> ";
                    cycle += *it;
                }
                cycle += " -> " + inc;
                throw Error(errc::include_cycle, "include cycle: " + cycle, cycle);
            }
            if (m == marks.end() || m->second == Mark::White) visit(inc);
        }
        marks[id] = Mark::Black;
        stack.pop_back();
    };

    for (const auto& [id, _] : nsfs) {
        if (marks.find(id) == marks.end() || marks[id] == Mark::White) visit(id);
    }
}

int count_template_slots(const std::string& tpl) {
    int max_slot = 0;
    static const std::regex slot_re(R"(\{(\d+)\})");
    for (auto it = std::sregex_iterator(tpl.begin(), tpl.end(), slot_re); it != std::sregex_iterator(); ++it)
        max_slot = std::max(max_slot, std::stoi((*it)[1].str()));
    return max_slot;
}

void validate_merge_groups(const ResolvedNsf& r) {
    std::map<std::string, std::vector<const MergeGroup*>> groups;
    for (const auto& [cap, det] : r.translation_details)
        if (det.merge_group) groups[det.merge_group->group_id].push_back(&*det.merge_group);
    for (auto& [gid, members] : groups) {
        std::set<int> slots;
        std::string tpl;
        for (const auto* m : members) {
            if (!slots.insert(m->slot).second)
                throw Error(errc::parse_error,
                            "merge group " + gid + " of " + r.id + " reuses slot " + std::to_string(m->slot));
            if (!m->template_text.empty()) tpl = m->template_text;
        }
        if (tpl.empty())
            throw Error(errc::parse_error, "merge group " + gid + " of " + r.id + " has no template");
        int n = static_cast<int>(members.size());
        if (*slots.begin() != 1 || *slots.rbegin() != n)
            throw Error(errc::parse_error, "merge group " + gid + " of " + r.id + " slots are not 1.." +
                                               std::to_string(n));
        if (count_template_slots(tpl) != n)
            throw Error(errc::parse_error, "merge group " + gid + " of " + r.id +
                                               " template slot count differs from member count");
    }
}

} // namespace

Catalogue Catalogue::build(std::vector<CapabilityDescriptor> capabilities,
                           std::vector<NsfDescriptor> nsfs,
                           std::vector<ResolutionStrategyDetails> strategy_details) {
    Catalogue cat;
    for (auto& c : capabilities) {
        validate_capability(c);
        std::string id = c.id;
        if (!cat.capabilities_.emplace(id, std::move(c)).second)
            throw Error(errc::parse_error, "duplicate capability id " + id);
    }
    for (auto& n : nsfs) {
        if (n.id.empty()) throw Error(errc::parse_error, "NSF with empty id");
        std::string id = n.id;
        if (!cat.nsfs_.emplace(id, std::move(n)).second)
            throw Error(errc::parse_error, "duplicate NSF id " + id);
    }

    for (const auto& [id, n] : cat.nsfs_) {
        for (const auto& ref : n.capability_refs)
            if (!cat.capabilities_.count(ref))
                throw Error(errc::dangling_reference, "NSF " + id + " references unknown capability " + ref, ref);
        for (const auto& inc : n.includes)
            if (!cat.nsfs_.count(inc))
                throw Error(errc::dangling_reference, "NSF " + id + " includes unknown NSF " + inc, inc);
        if (n.resolution_strategy) {
            auto* c = cat.find_capability(*n.resolution_strategy);
            if (!c)
                throw Error(errc::dangling_reference,
                            "NSF " + id + " names unknown resolution strategy " + *n.resolution_strategy,
                            *n.resolution_strategy);
            if (c->kind != CapabilityKind::ResolutionStrategy)
                throw Error(errc::parse_error, "NSF " + id + ": " + c->id + " is not a resolution strategy");
        }
        for (const auto& d : n.default_action_pool) {
            auto* c = cat.find_capability(d);
            if (!c) throw Error(errc::dangling_reference, "NSF " + id + " pools unknown capability " + d, d);
            if (c->kind != CapabilityKind::Action)
                throw Error(errc::parse_error, "NSF " + id + " pools non-action capability " + d);
        }
        if (n.policy_details && !recognized_encoding(n.policy_details->policy_encoding))
            throw Error(errc::parse_error,
                        "NSF " + id + " names unrecognized encoding " + n.policy_details->policy_encoding);
    }

    check_include_cycles(cat.nsfs_);

    for (auto& d : strategy_details) {
        auto* c = cat.find_capability(d.strategy_capability);
        if (!c)
            throw Error(errc::dangling_reference,
                        "strategy details for unknown capability " + d.strategy_capability);
        if (c->kind != CapabilityKind::ResolutionStrategy)
            throw Error(errc::parse_error, d.strategy_capability + " is not a resolution strategy");
        cat.strategy_details_.emplace(d.strategy_capability, std::move(d));
    }

    // Post-resolution checks: details keys within the resolved set, mandatory
    // capabilities resolvable, merge groups well-formed.
    for (const auto& [id, _] : cat.nsfs_) {
        ResolvedNsf r = cat.resolve(id);
        const auto& own = cat.nsfs_.at(id);
        for (const auto& [cap, det] : own.translation_details) {
            if (!r.owns(cap))
                throw Error(errc::dangling_reference,
                            "NSF " + id + " details a capability it does not own: " + cap, cap);
            if (det.command_names.empty() ||
                std::none_of(det.command_names.begin(), det.command_names.end(),
                             [](const CommandName& c) { return !c.condition; }))
                throw Error(errc::parse_error,
                            "NSF " + id + " details for " + cap + " lack an unconditioned command name");
            for (const auto& dep : det.dependencies)
                if (!r.owns(dep.of_capability))
                    throw Error(errc::dangling_reference,
                                "NSF " + id + " dependency targets unowned capability " + dep.of_capability,
                                dep.of_capability);
        }
        if (own.policy_details)
            for (const auto& m : own.policy_details->mandatory_capabilities)
                if (!r.owns(m))
                    throw Error(errc::dangling_reference,
                                "NSF " + id + " mandates a capability it does not own: " + m, m);
        validate_merge_groups(r);
    }
    return cat;
}

const CapabilityDescriptor* Catalogue::find_capability(const std::string& id) const {
    auto it = capabilities_.find(id);
    return it == capabilities_.end() ? nullptr : &it->second;
}

const CapabilityDescriptor& Catalogue::capability(const std::string& id) const {
    auto* c = find_capability(id);
    if (!c) throw Error(errc::unknown_capability, "unknown capability " + id, id);
    return *c;
}

const NsfDescriptor* Catalogue::find_nsf(const std::string& id) const {
    auto it = nsfs_.find(id);
    return it == nsfs_.end() ? nullptr : &it->second;
}

const NsfDescriptor& Catalogue::nsf(const std::string& id) const {
    auto* n = find_nsf(id);
    if (!n) throw Error(errc::unknown_nsf, "unknown NSF " + id, id);
    return *n;
}

std::vector<std::string> Catalogue::nsf_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : nsfs_) out.push_back(id);
    return out;
}

std::vector<std::string> Catalogue::capability_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : capabilities_) out.push_back(id);
    return out;
}

const ResolutionStrategyDetails* Catalogue::strategy_details_for(const std::string& capability_id) const {
    auto it = strategy_details_.find(capability_id);
    return it == strategy_details_.end() ? nullptr : &it->second;
}

ResolvedNsf Catalogue::resolve(const std::string& nsf_id) const {
    const NsfDescriptor& root = nsf(nsf_id);

    ResolvedNsf out;
    out.id = root.id;

    // Breadth-first over includes: depth 0 is the NSF itself, so the first
    // writer of any decoration is the nearest definition.
    std::deque<const NsfDescriptor*> queue{&root};
    std::set<std::string> seen{root.id};
    while (!queue.empty()) {
        const NsfDescriptor* n = queue.front();
        queue.pop_front();
        out.capabilities.insert(n->capability_refs.begin(), n->capability_refs.end());
        out.default_action_pool.insert(n->default_action_pool.begin(), n->default_action_pool.end());
        for (const auto& [cap, det] : n->translation_details)
            out.translation_details.emplace(cap, det); // emplace keeps the nearer definition
        if (!out.policy_details && n->policy_details) out.policy_details = n->policy_details;
        if (!out.resolution_strategy && n->resolution_strategy)
            out.resolution_strategy = n->resolution_strategy;
        for (const auto& inc : n->includes)
            if (seen.insert(inc).second) queue.push_back(&nsfs_.at(inc));
    }
    if (out.resolution_strategy) {
        if (const auto* det = strategy_details_for(*out.resolution_strategy)) out.strategy_details = *det;
    }
    return out;
}

ComparisonResult compare(const Catalogue& cat, const std::string& a, const std::string& b) {
    auto ra = cat.resolve(a);
    auto rb = cat.resolve(b);
    ComparisonResult result;
    std::set_intersection(ra.capabilities.begin(), ra.capabilities.end(), rb.capabilities.begin(),
                          rb.capabilities.end(), std::inserter(result.shared, result.shared.begin()));
    if (ra.capabilities == rb.capabilities) result.relation = Relation::Equivalent;
    else if (result.shared.empty() && !(ra.capabilities.empty() && rb.capabilities.empty()))
        result.relation = Relation::Disjoint;
    else if (result.shared == ra.capabilities) result.relation = Relation::ProperSubsetAofB;
    else if (result.shared == rb.capabilities) result.relation = Relation::ProperSubsetBofA;
    else result.relation = Relation::Overlapping;
    return result;
}

std::vector<std::string> substitutes(const Catalogue& cat, const std::string& nsf_id) {
    auto base = cat.resolve(nsf_id);
    std::vector<std::string> out;
    for (const auto& other : cat.nsf_ids()) {
        if (other == nsf_id) continue;
        auto r = cat.resolve(other);
        if (std::includes(r.capabilities.begin(), r.capabilities.end(), base.capabilities.begin(),
                          base.capabilities.end()))
            out.push_back(other);
    }
    return out; // nsf_ids() is already lexicographic
}

std::vector<std::string> search(const Catalogue& cat, const std::vector<std::string>& capability_ids) {
    if (capability_ids.empty())
        throw Error(errc::parse_error, "search needs at least one capability id");
    for (const auto& id : capability_ids) cat.capability(id); // throws UnknownCapability
    std::vector<std::string> out;
    for (const auto& nsf_id : cat.nsf_ids()) {
        auto r = cat.resolve(nsf_id);
        if (std::all_of(capability_ids.begin(), capability_ids.end(),
                        [&](const std::string& c) { return r.owns(c); }))
            out.push_back(nsf_id);
    }
    return out;
}

nlohmann::json comparison_to_json(const ComparisonResult& r) {
    return {{"relation", to_string(r.relation)}, {"shared", r.shared}};
}

// --- Document loading --------------------------------------------------------

namespace {

ValueType parse_value_type(const std::string& s, const std::string& path) {
    auto t = value_type_from_string(s);
    if (!t) throw Error(errc::parse_error, path + ": unknown value type " + s);
    return *t;
}

CapabilityDescriptor parse_capability(const json& j, const std::string& path) {
    docjson::require_object(j, path);
    docjson::reject_unknown_keys(j, {"id", "kind", "valueType", "operators", "enumValues"}, path);
    CapabilityDescriptor c;
    c.id = docjson::get_string(j, "id", path);
    auto kind = capability_kind_from_string(docjson::get_string(j, "kind", path));
    if (!kind) throw Error(errc::parse_error, path + ".kind: unknown capability kind");
    c.kind = *kind;
    c.value_type = parse_value_type(docjson::get_string(j, "valueType", path), path + ".valueType");
    for (const auto& s : docjson::string_array(j, "operators", path)) {
        auto op = operator_from_string(s);
        if (!op) throw Error(errc::parse_error, path + ".operators: unknown operator " + s);
        c.operators.insert(*op);
    }
    c.enum_values = docjson::string_array(j, "enumValues", path);
    return c;
}

CommandName parse_command_name(const json& j, const std::string& path) {
    docjson::require_object(j, path);
    docjson::reject_unknown_keys(j, {"realCommandName", "condition"}, path);
    CommandName c;
    c.real_command_name = docjson::get_string(j, "realCommandName", path);
    if (j.contains("condition")) {
        const auto& cond = docjson::require_object(j.at("condition"), path + ".condition");
        c.condition = CommandNameCondition{docjson::get_string(cond, "attributeName", path + ".condition"),
                                           docjson::get_string(cond, "attributeValue", path + ".condition")};
    }
    return c;
}

TranslationDetails parse_translation_details(const json& j, const std::string& path) {
    docjson::require_object(j, path);
    docjson::reject_unknown_keys(j,
                                 {"capability", "commandNames", "prefix", "suffix", "valueSeparator",
                                  "rangeSeparator", "bodyConcatenator", "dependencies", "mergeGroup",
                                  "preferredExpansion"},
                                 path);
    TranslationDetails d;
    d.capability = docjson::get_string(j, "capability", path);
    if (j.contains("commandNames")) {
        const auto& arr = docjson::require_array(j.at("commandNames"), path + ".commandNames");
        for (std::size_t i = 0; i < arr.size(); ++i)
            d.command_names.push_back(parse_command_name(arr[i], docjson::index_path(path + ".commandNames", i)));
    }
    if (auto s = docjson::opt_string(j, "prefix", path)) d.prefix = *s;
    if (auto s = docjson::opt_string(j, "suffix", path)) d.suffix = *s;
    if (auto s = docjson::opt_string(j, "valueSeparator", path)) d.value_separator = *s;
    if (auto s = docjson::opt_string(j, "rangeSeparator", path)) d.range_separator = *s;
    if (j.contains("bodyConcatenator")) {
        const auto& cj = docjson::require_object(j.at("bodyConcatenator"), path + ".bodyConcatenator");
        Concatenator c;
        if (auto s = docjson::opt_string(cj, "operatorType", path)) c.operator_type = *s;
        if (c.operator_type != "union")
            throw Error(errc::parse_error, path + ".bodyConcatenator: unsupported operator type");
        c.real_concatenator = docjson::get_string(cj, "realConcatenator", path + ".bodyConcatenator");
        if (cj.contains("applicability")) {
            const auto& aj = docjson::require_object(cj.at("applicability"), path + ".applicability");
            c.applicability = ConcatenatorApplicability{
                docjson::get_string(aj, "preVariable", path + ".applicability"),
                docjson::get_string(aj, "postVariable", path + ".applicability")};
        }
        if (cj.contains("newCommandNames")) {
            const auto& arr = docjson::require_array(cj.at("newCommandNames"), path + ".newCommandNames");
            for (std::size_t i = 0; i < arr.size(); ++i)
                c.new_command_names.push_back(
                    parse_command_name(arr[i], docjson::index_path(path + ".newCommandNames", i)));
        }
        d.body_concatenator = std::move(c);
    }
    if (j.contains("dependencies")) {
        const auto& arr = docjson::require_array(j.at("dependencies"), path + ".dependencies");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto& dj = docjson::require_object(arr[i], docjson::index_path(path + ".dependencies", i));
            Dependency dep;
            auto mode = docjson::get_string(dj, "mode", path);
            if (mode == "presence") dep.mode = DependencyMode::Presence;
            else if (mode == "absence") dep.mode = DependencyMode::Absence;
            else throw Error(errc::parse_error, path + ".dependencies: unknown mode " + mode);
            dep.of_capability = docjson::get_string(dj, "ofCapability", path);
            dep.required_value = docjson::string_array(dj, "requiredValue", path);
            d.dependencies.push_back(std::move(dep));
        }
    }
    if (j.contains("mergeGroup")) {
        const auto& mj = docjson::require_object(j.at("mergeGroup"), path + ".mergeGroup");
        MergeGroup g;
        g.group_id = docjson::get_string(mj, "groupId", path + ".mergeGroup");
        auto slot = docjson::opt_number(mj, "slot", path + ".mergeGroup");
        g.slot = slot ? static_cast<int>(*slot) : 1;
        if (auto s = docjson::opt_string(mj, "template", path + ".mergeGroup")) g.template_text = *s;
        if (auto s = docjson::opt_string(mj, "emitOncePrefix", path + ".mergeGroup")) g.emit_once_prefix = *s;
        d.merge_group = std::move(g);
    }
    if (auto s = docjson::opt_string(j, "preferredExpansion", path)) {
        if (*s == "auto") d.preferred_expansion = PreferredExpansion::Auto;
        else if (*s == "always") d.preferred_expansion = PreferredExpansion::Always;
        else if (*s == "never") d.preferred_expansion = PreferredExpansion::Never;
        else throw Error(errc::parse_error, path + ".preferredExpansion: unknown value " + *s);
    }
    return d;
}

NsfDescriptor parse_nsf(const json& j, const std::string& path) {
    docjson::require_object(j, path);
    docjson::reject_unknown_keys(j,
                                 {"id", "includes", "capabilities", "policyDetails", "resolutionStrategy",
                                  "defaultActionPool", "translationDetails"},
                                 path);
    NsfDescriptor n;
    n.id = docjson::get_string(j, "id", path);
    for (const auto& s : docjson::string_array(j, "includes", path)) n.includes.push_back(s);
    for (const auto& s : docjson::string_array(j, "capabilities", path)) n.capability_refs.insert(s);
    if (j.contains("policyDetails")) {
        const auto& pj = docjson::require_object(j.at("policyDetails"), path + ".policyDetails");
        docjson::reject_unknown_keys(pj,
                                     {"ruleStart", "ruleEnd", "policyTrailer", "policyEncoding",
                                      "mandatoryCapabilities", "policyAttributes"},
                                     path + ".policyDetails");
        NsfPolicyDetails pd;
        if (auto s = docjson::opt_string(pj, "ruleStart", path)) pd.rule_start = *s;
        if (auto s = docjson::opt_string(pj, "ruleEnd", path)) pd.rule_end = *s;
        if (auto s = docjson::opt_string(pj, "policyTrailer", path)) pd.policy_trailer = *s;
        if (auto s = docjson::opt_string(pj, "policyEncoding", path)) pd.policy_encoding = *s;
        pd.mandatory_capabilities = docjson::string_array(pj, "mandatoryCapabilities", path);
        if (pj.contains("policyAttributes")) {
            const auto& arr = docjson::require_array(pj.at("policyAttributes"), path + ".policyAttributes");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const auto& aj =
                    docjson::require_object(arr[i], docjson::index_path(path + ".policyAttributes", i));
                pd.policy_attributes.push_back(PolicyAttributeSpec{
                    docjson::get_string(aj, "attributeName", path + ".policyAttributes")});
            }
        }
        n.policy_details = std::move(pd);
    }
    if (auto s = docjson::opt_string(j, "resolutionStrategy", path)) n.resolution_strategy = *s;
    for (const auto& s : docjson::string_array(j, "defaultActionPool", path)) n.default_action_pool.insert(s);
    if (j.contains("translationDetails")) {
        const auto& arr = docjson::require_array(j.at("translationDetails"), path + ".translationDetails");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            auto det = parse_translation_details(arr[i], docjson::index_path(path + ".translationDetails", i));
            std::string cap = det.capability;
            if (!n.translation_details.emplace(cap, std::move(det)).second)
                throw Error(errc::parse_error, path + ": duplicate translation details for " + cap);
        }
    }
    return n;
}

ResolutionStrategyDetails parse_strategy_details(const json& j, const std::string& path) {
    docjson::require_object(j, path);
    docjson::reject_unknown_keys(j, {"strategyCapability", "requiredExternalData", "ordering"}, path);
    ResolutionStrategyDetails d;
    d.strategy_capability = docjson::get_string(j, "strategyCapability", path);
    if (j.contains("requiredExternalData")) {
        const auto& arr = docjson::require_array(j.at("requiredExternalData"), path + ".requiredExternalData");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto& ej =
                docjson::require_object(arr[i], docjson::index_path(path + ".requiredExternalData", i));
            ExternalDataSpec spec;
            spec.name = docjson::get_string(ej, "name", path);
            spec.value_type = parse_value_type(docjson::get_string(ej, "valueType", path), path);
            d.required_external_data.push_back(std::move(spec));
        }
    }
    if (auto s = docjson::opt_string(j, "ordering", path)) {
        if (*s == "ascending") d.ordering = Ordering::Ascending;
        else if (*s == "descending") d.ordering = Ordering::Descending;
        else throw Error(errc::parse_error, path + ".ordering: unknown value " + *s);
    }
    return d;
}

} // namespace

Catalogue load_catalogue(const nlohmann::json& document, const std::string& origin) {
    docjson::require_object(document, origin);
    docjson::reject_unknown_keys(document, {"capabilities", "nsfs", "resolutionStrategyDetails"}, origin);

    std::vector<CapabilityDescriptor> caps;
    std::vector<NsfDescriptor> nsfs;
    std::vector<ResolutionStrategyDetails> details;

    if (document.contains("capabilities")) {
        const auto& arr = docjson::require_array(document.at("capabilities"), origin + ".capabilities");
        for (std::size_t i = 0; i < arr.size(); ++i)
            caps.push_back(parse_capability(arr[i], docjson::index_path(origin + ".capabilities", i)));
    }
    if (document.contains("nsfs")) {
        const auto& arr = docjson::require_array(document.at("nsfs"), origin + ".nsfs");
        for (std::size_t i = 0; i < arr.size(); ++i)
            nsfs.push_back(parse_nsf(arr[i], docjson::index_path(origin + ".nsfs", i)));
    }
    if (document.contains("resolutionStrategyDetails")) {
        const auto& arr = docjson::require_array(document.at("resolutionStrategyDetails"),
                                                 origin + ".resolutionStrategyDetails");
        for (std::size_t i = 0; i < arr.size(); ++i)
            details.push_back(
                parse_strategy_details(arr[i], docjson::index_path(origin + ".resolutionStrategyDetails", i)));
    }
    return Catalogue::build(std::move(caps), std::move(nsfs), std::move(details));
}

Catalogue load_catalogue_file(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path)) {
        // A catalogue may be split across files; arrays are concatenated in
        // filename order.
        json merged = json::object();
        merged["capabilities"] = json::array();
        merged["nsfs"] = json::array();
        merged["resolutionStrategyDetails"] = json::array();
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path))
            if (e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            json part = docjson::load_file(f.string());
            docjson::require_object(part, f.string());
            for (const char* key : {"capabilities", "nsfs", "resolutionStrategyDetails"})
                if (part.contains(key))
                    for (const auto& item : part.at(key)) merged[key].push_back(item);
        }
        return load_catalogue(merged, path);
    }
    return load_catalogue(docjson::load_file(path), path);
}

} // namespace capforge::catalogue
