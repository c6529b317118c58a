#include "capforge/refine.hpp"

#include "capforge/docjson.hpp"
#include "capforge/errors.hpp"

#include <algorithm>

namespace capforge::refine {

using docjson::json;
using landscape::Hlp;
using landscape::Landscape;
using landscape::Path;
using catalogue::Catalogue;

const char* to_string(EnforcementMode m) {
    switch (m) {
    case EnforcementMode::AnyPathAllow: return "any_path_allow";
    case EnforcementMode::AllPathsDeny: return "all_paths_deny";
    case EnforcementMode::EndpointPair: return "endpoint_pair";
    }
    return "all_paths_deny";
}

const char* to_string(Strategy s) {
    switch (s) {
    case Strategy::MinControls: return "min-controls";
    case Strategy::DefenseInDepth: return "defense-in-depth";
    case Strategy::Interactive: return "interactive";
    }
    return "min-controls";
}

std::optional<Strategy> strategy_from_string(const std::string& s) {
    if (s == "min-controls" || s == "min_controls") return Strategy::MinControls;
    if (s == "defense-in-depth" || s == "defense_in_depth") return Strategy::DefenseInDepth;
    if (s == "interactive") return Strategy::Interactive;
    return std::nullopt;
}

const char* to_string(Status s) {
    switch (s) {
    case Status::Enforced: return "enforced";
    case Status::NeedsDecision: return "needs_decision";
    case Status::UnenforceableWithProposal: return "unenforceable_with_proposal";
    case Status::Unenforceable: return "unenforceable";
    }
    return "unenforceable";
}

// --- Mapping ------------------------------------------------------------------

Mapping load_mapping(const nlohmann::json& document, const std::string& origin) {
    docjson::require_object(document, origin);
    docjson::reject_unknown_keys(
        document, {"verbs", "options", "policyAttributeDefaults", "mandatoryCapabilityValues"}, origin);
    Mapping m;

    const auto& verbs = docjson::require_object(document.at("verbs"), origin + ".verbs");
    for (auto it = verbs.begin(); it != verbs.end(); ++it) {
        std::string path = docjson::join_path(origin + ".verbs", it.key());
        const auto& vj = docjson::require_object(it.value(), path);
        docjson::reject_unknown_keys(vj, {"requiredCapabilities", "template", "enforcementMode", "fixedActions"},
                                     path);
        VerbSpec v;
        for (const auto& c : docjson::string_array(vj, "requiredCapabilities", path))
            v.required_capabilities.insert(c);
        const auto& tj = docjson::require_object(vj.at("template"), path + ".template");
        v.rule_template.subject_condition = docjson::get_string(tj, "subject", path + ".template");
        v.rule_template.object_condition = docjson::get_string(tj, "object", path + ".template");
        v.rule_template.decision_action = docjson::get_string(tj, "decision", path + ".template");
        std::string mode = docjson::get_string(vj, "enforcementMode", path);
        if (mode == "any_path_allow") v.enforcement_mode = EnforcementMode::AnyPathAllow;
        else if (mode == "all_paths_deny") v.enforcement_mode = EnforcementMode::AllPathsDeny;
        else if (mode == "endpoint_pair") v.enforcement_mode = EnforcementMode::EndpointPair;
        else throw Error(errc::parse_error, path + ": unknown enforcement mode " + mode);
        if (vj.contains("fixedActions")) {
            const auto& arr = docjson::require_array(vj.at("fixedActions"), path + ".fixedActions");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const auto& fj = docjson::require_object(arr[i], docjson::index_path(path + ".fixedActions", i));
                FixedAction f;
                f.capability = docjson::get_string(fj, "capability", path);
                f.value = docjson::opt_string(fj, "value", path);
                v.fixed_actions.push_back(std::move(f));
            }
        }
        m.verbs[it.key()] = std::move(v);
    }

    if (document.contains("options")) {
        const auto& options = docjson::require_object(document.at("options"), origin + ".options");
        for (auto it = options.begin(); it != options.end(); ++it) {
            std::string path = docjson::join_path(origin + ".options", it.key());
            const auto& oj = docjson::require_object(it.value(), path);
            docjson::reject_unknown_keys(oj, {"condition", "operation", "split", "replaces", "decision", "action"},
                                         path);
            OptionSpec o;
            o.condition = docjson::opt_string(oj, "condition", path);
            if (auto op = docjson::opt_string(oj, "operation", path)) {
                auto parsed = mlp::operation_from_string(*op);
                if (!parsed) throw Error(errc::parse_error, path + ".operation: unknown operation " + *op);
                o.operation = *parsed;
            }
            o.split = docjson::opt_string(oj, "split", path);
            for (const auto& r : docjson::string_array(oj, "replaces", path)) {
                if (r != "subject" && r != "object")
                    throw Error(errc::parse_error, path + ".replaces: unknown slot " + r);
                o.replaces.insert(r);
            }
            if (oj.contains("decision")) {
                const auto& dj = docjson::require_object(oj.at("decision"), path + ".decision");
                for (auto d = dj.begin(); d != dj.end(); ++d)
                    o.decision_by_verb[d.key()] =
                        docjson::require_string(d.value(), docjson::join_path(path + ".decision", d.key()));
            }
            o.action = docjson::opt_string(oj, "action", path);
            m.options[it.key()] = std::move(o);
        }
    }

    if (document.contains("policyAttributeDefaults")) {
        const auto& aj =
            docjson::require_object(document.at("policyAttributeDefaults"), origin + ".policyAttributeDefaults");
        for (auto it = aj.begin(); it != aj.end(); ++it)
            m.policy_attribute_defaults[it.key()] = docjson::require_string(
                it.value(), docjson::join_path(origin + ".policyAttributeDefaults", it.key()));
    }
    if (document.contains("mandatoryCapabilityValues")) {
        const auto& mj = docjson::require_object(document.at("mandatoryCapabilityValues"),
                                                 origin + ".mandatoryCapabilityValues");
        for (auto it = mj.begin(); it != mj.end(); ++it)
            m.mandatory_capability_values[it.key()] = docjson::require_string(
                it.value(), docjson::join_path(origin + ".mandatoryCapabilityValues", it.key()));
    }
    return m;
}

Mapping load_mapping_file(const std::string& path) {
    return load_mapping(docjson::load_file(path), path);
}

// --- Capability derivation ------------------------------------------------------

namespace {

const VerbSpec& verb_spec(const Hlp& hlp, const Mapping& mapping) {
    auto it = mapping.verbs.find(hlp.action);
    if (it == mapping.verbs.end())
        throw Error(errc::unknown_verb, "no mapping for verb " + hlp.action, hlp.action);
    return it->second;
}

const OptionSpec& option_spec(const std::string& name, const Mapping& mapping) {
    auto it = mapping.options.find(name);
    if (it == mapping.options.end())
        throw Error(errc::unsupported_option, "unsupported HLP option " + name, name);
    return it->second;
}

// The decision action after per-verb option overrides.
std::string effective_decision(const Hlp& hlp, const Mapping& mapping) {
    const auto& verb = verb_spec(hlp, mapping);
    std::string decision = verb.rule_template.decision_action;
    for (const auto& [name, _] : hlp.options) {
        const auto& spec = option_spec(name, mapping);
        auto it = spec.decision_by_verb.find(hlp.action);
        if (it != spec.decision_by_verb.end()) decision = it->second;
    }
    return decision;
}

std::set<std::string> replaced_slots(const Hlp& hlp, const Mapping& mapping) {
    std::set<std::string> out;
    for (const auto& [name, _] : hlp.options) {
        const auto& spec = option_spec(name, mapping);
        out.insert(spec.replaces.begin(), spec.replaces.end());
    }
    return out;
}

} // namespace

std::set<std::string> required_capabilities(const Hlp& hlp, const Mapping& mapping) {
    const auto& verb = verb_spec(hlp, mapping);
    std::set<std::string> out = verb.required_capabilities;

    auto replaced = replaced_slots(hlp, mapping);
    if (replaced.count("subject")) out.erase(verb.rule_template.subject_condition);
    if (replaced.count("object")) out.erase(verb.rule_template.object_condition);

    std::string decision = effective_decision(hlp, mapping);
    if (decision != verb.rule_template.decision_action) out.erase(verb.rule_template.decision_action);
    out.insert(decision);

    for (const auto& [name, _] : hlp.options) {
        const auto& spec = option_spec(name, mapping);
        if (spec.condition) out.insert(*spec.condition);
        if (spec.action) out.insert(*spec.action);
    }
    return out;
}

// --- Candidate discovery ---------------------------------------------------------

Candidates candidate_controls(const Hlp& hlp, const Landscape& ls, const Catalogue& cat,
                              const Mapping& mapping) {
    const auto& verb = verb_spec(hlp, mapping);
    auto required = required_capabilities(hlp, mapping);

    Candidates out;
    out.mode = verb.enforcement_mode;

    auto capable_nsfs = [&](const std::string& node_id) {
        std::vector<std::string> hits;
        const auto* node = ls.find_node(node_id);
        if (!node) return hits;
        for (const auto& nsf : node->installed_nsfs) {
            auto resolved = cat.resolve(nsf);
            if (std::all_of(required.begin(), required.end(),
                            [&](const std::string& c) { return resolved.owns(c); }))
                hits.push_back(nsf);
        }
        std::sort(hits.begin(), hits.end());
        return hits;
    };

    for (const auto& path : landscape::paths(ls, hlp.subject, hlp.object)) {
        PathCandidates pc;
        pc.path = path;
        for (const auto& node : path)
            for (const auto& nsf : capable_nsfs(node)) pc.controls.push_back({node, nsf});
        std::sort(pc.controls.begin(), pc.controls.end());
        pc.controls.erase(std::unique(pc.controls.begin(), pc.controls.end()), pc.controls.end());
        out.per_path.push_back(std::move(pc));
    }

    if (out.mode == EnforcementMode::EndpointPair) {
        // A protection tunnel is defined by its endpoints: bracket each path
        // with the first and last capable control, deduplicate across paths.
        std::set<EndpointPairCandidate> pairs;
        for (const auto& pc : out.per_path) {
            std::optional<CandidateControl> first, last;
            for (const auto& node : pc.path) {
                for (const auto& ctl : pc.controls) {
                    if (ctl.node_id != node) continue;
                    if (!first) first = ctl;
                    last = ctl;
                }
            }
            if (first && last && !(first->node_id == last->node_id)) pairs.insert({*first, *last});
        }
        out.pairs.assign(pairs.begin(), pairs.end());
    }

    if (out.mode == EnforcementMode::AnyPathAllow) {
        for (std::size_t i = 0; i < out.per_path.size(); ++i) {
            if (!out.chosen_path && !out.per_path[i].controls.empty()) {
                out.chosen_path = i;
            } else {
                out.alternate_paths.push_back(out.per_path[i].path);
            }
        }
    }
    return out;
}

// --- Selection ---------------------------------------------------------------------

namespace {

std::vector<CandidateControl> nodes_to_controls(const std::set<std::string>& nodes,
                                                const std::vector<PathCandidates>& per_path) {
    // For each selected node take the lexicographically first capable NSF.
    std::map<std::string, std::string> chosen;
    for (const auto& pc : per_path)
        for (const auto& ctl : pc.controls)
            if (nodes.count(ctl.node_id)) {
                auto it = chosen.find(ctl.node_id);
                if (it == chosen.end() || ctl.nsf_id < it->second) chosen[ctl.node_id] = ctl.nsf_id;
            }
    std::vector<CandidateControl> out;
    for (const auto& [node, nsf] : chosen) out.push_back({node, nsf});
    return out;
}

std::vector<CandidateControl> greedy_hitting_set(const std::vector<const PathCandidates*>& must_cover,
                                                 const std::vector<PathCandidates>& per_path) {
    std::set<std::size_t> uncovered;
    for (std::size_t i = 0; i < must_cover.size(); ++i) uncovered.insert(i);

    std::set<std::string> picked;
    while (!uncovered.empty()) {
        std::map<std::string, std::size_t> gain;
        for (std::size_t i : uncovered)
            for (const auto& ctl : must_cover[i]->controls) ++gain[ctl.node_id];
        if (gain.empty())
            throw Error(errc::uncoverable, "a required path has no capable control");
        // Highest gain; std::map iteration makes the lexicographically first
        // node win ties.
        std::string best;
        std::size_t best_gain = 0;
        for (const auto& [node, g] : gain)
            if (g > best_gain) {
                best = node;
                best_gain = g;
            }
        picked.insert(best);
        for (auto it = uncovered.begin(); it != uncovered.end();) {
            bool hit = std::any_of(must_cover[*it]->controls.begin(), must_cover[*it]->controls.end(),
                                   [&](const CandidateControl& c) { return c.node_id == best; });
            it = hit ? uncovered.erase(it) : ++it;
        }
    }
    return nodes_to_controls(picked, per_path);
}

} // namespace

std::vector<CandidateControl> select_controls(const Hlp& hlp, const Candidates& candidates,
                                              Strategy strategy, const DecisionCallback& callback) {
    if (candidates.mode == EnforcementMode::EndpointPair) {
        if (candidates.pairs.empty())
            throw Error(errc::uncoverable, "no capable endpoint pair between " + hlp.subject + " and " +
                                               hlp.object);
        std::vector<CandidateControl> out;
        if (strategy == Strategy::DefenseInDepth) {
            for (const auto& p : candidates.pairs) {
                out.push_back(p.subject_side);
                out.push_back(p.object_side);
            }
        } else {
            const auto& p = candidates.pairs.front(); // pairs are sorted
            out.push_back(p.subject_side);
            out.push_back(p.object_side);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // Paths that must be covered: all of them for deny, the chosen one for allow.
    std::vector<const PathCandidates*> must_cover;
    if (candidates.mode == EnforcementMode::AllPathsDeny) {
        for (const auto& pc : candidates.per_path) must_cover.push_back(&pc);
    } else {
        if (!candidates.chosen_path)
            throw Error(errc::uncoverable, "no path with a capable control between " + hlp.subject +
                                               " and " + hlp.object);
        must_cover.push_back(&candidates.per_path[*candidates.chosen_path]);
    }
    if (must_cover.empty())
        throw Error(errc::uncoverable, "no path between " + hlp.subject + " and " + hlp.object);
    for (const auto* pc : must_cover)
        if (pc->controls.empty())
            throw Error(errc::uncoverable, "path without a capable control between " + hlp.subject +
                                               " and " + hlp.object);

    switch (strategy) {
    case Strategy::DefenseInDepth: {
        std::set<std::string> nodes;
        for (const auto* pc : must_cover)
            for (const auto& ctl : pc->controls) nodes.insert(ctl.node_id);
        return nodes_to_controls(nodes, candidates.per_path);
    }
    case Strategy::MinControls:
        return greedy_hitting_set(must_cover, candidates.per_path);
    case Strategy::Interactive: {
        std::set<std::string> nodes;
        for (const auto* pc : must_cover) {
            std::set<std::string> distinct;
            for (const auto& ctl : pc->controls) distinct.insert(ctl.node_id);
            if (distinct.size() == 1) {
                nodes.insert(*distinct.begin());
                continue;
            }
            // Only an actual multi-choice needs a decision.
            if (!callback)
                throw Error("DecisionNeeded", "interactive refinement needs a decision callback");
            std::size_t pick = callback(hlp, pc->path, pc->controls);
            if (pick >= pc->controls.size())
                throw Error(errc::invalid_policy, "decision callback returned an out-of-range choice");
            nodes.insert(pc->controls[pick].node_id);
        }
        return nodes_to_controls(nodes, candidates.per_path);
    }
    }
    return {};
}

// --- MLP generation ------------------------------------------------------------------

namespace {

std::vector<Value> option_values(const std::string& raw, const OptionSpec& spec) {
    std::vector<Value> out;
    if (spec.split) {
        std::size_t pos = 0;
        while (pos <= raw.size()) {
            auto next = raw.find(*spec.split, pos);
            std::string part = raw.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
            if (!part.empty()) out.push_back(parse_value_literal(part));
            if (next == std::string::npos) break;
            pos = next + spec.split->size();
        }
    } else {
        out.push_back(parse_value_literal(raw));
    }
    if (out.empty()) throw Error(errc::template_slot_unfillable, "option produced no values");
    return out;
}

} // namespace

std::map<std::string, mlp::MlpPolicy> generate_mlps(const Hlp& hlp,
                                                    const std::vector<CandidateControl>& selection,
                                                    const Mapping& mapping, const Landscape& ls,
                                                    const Catalogue& cat, int priority) {
    const auto& verb = verb_spec(hlp, mapping);
    auto replaced = replaced_slots(hlp, mapping);
    std::string decision = effective_decision(hlp, mapping);

    std::map<std::string, mlp::MlpPolicy> out;
    for (const auto& ctl : selection) {
        auto resolved = cat.resolve(ctl.nsf_id);

        mlp::MlpRule rule;
        rule.id = "hlp" + std::to_string(priority) + "-" + ctl.node_id;
        rule.description = hlp.subject + " " + hlp.action + " " + hlp.object;

        if (!replaced.count("subject")) {
            mlp::ConditionInstance c;
            c.capability = verb.rule_template.subject_condition;
            c.values.push_back(parse_value_literal(ls.entity(hlp.subject).address));
            rule.conditions.push_back(std::move(c));
        }
        if (!replaced.count("object")) {
            mlp::ConditionInstance c;
            c.capability = verb.rule_template.object_condition;
            c.values.push_back(parse_value_literal(ls.entity(hlp.object).address));
            rule.conditions.push_back(std::move(c));
        }
        for (const auto& [name, raw] : hlp.options) {
            const auto& spec = option_spec(name, mapping);
            if (!spec.condition) continue;
            mlp::ConditionInstance c;
            c.capability = *spec.condition;
            c.operation = spec.operation;
            c.values = option_values(raw, spec);
            rule.conditions.push_back(std::move(c));
        }

        rule.actions.push_back(mlp::ActionInstance{decision, std::nullopt});
        for (const auto& fixed : verb.fixed_actions)
            rule.actions.push_back(mlp::ActionInstance{fixed.capability, fixed.value});
        for (const auto& [name, raw] : hlp.options) {
            const auto& spec = option_spec(name, mapping);
            if (spec.action) rule.actions.push_back(mlp::ActionInstance{*spec.action, raw});
        }

        // The target's mandatory capabilities must appear in every rule.
        if (resolved.policy_details)
            for (const auto& mand : resolved.policy_details->mandatory_capabilities) {
                bool present =
                    std::any_of(rule.actions.begin(), rule.actions.end(),
                                [&](const mlp::ActionInstance& a) { return a.capability == mand; }) ||
                    std::any_of(rule.conditions.begin(), rule.conditions.end(),
                                [&](const mlp::ConditionInstance& c) { return c.capability == mand; });
                if (present) continue;
                const auto& desc = cat.capability(mand);
                std::optional<std::string> value;
                if (desc.value_type != ValueType::None) {
                    auto it = mapping.mandatory_capability_values.find(mand);
                    if (it == mapping.mandatory_capability_values.end())
                        throw Error(errc::template_slot_unfillable,
                                    "no value available for the mandatory capability " + mand, mand);
                    value = it->second;
                }
                rule.actions.insert(rule.actions.begin(), mlp::ActionInstance{mand, value});
            }

        if (resolved.strategy_details)
            for (const auto& spec : resolved.strategy_details->required_external_data) {
                if (spec.name == "priority" && spec.value_type == ValueType::Integer)
                    rule.external_data["priority"] = std::to_string(priority);
                else
                    throw Error(errc::template_slot_unfillable,
                                "cannot synthesize external data \"" + spec.name + "\"", spec.name);
            }

        auto& policy = out[ctl.nsf_id];
        if (policy.nsf_name.empty()) {
            policy.nsf_name = ctl.nsf_id;
            if (resolved.policy_details)
                for (const auto& attr : resolved.policy_details->policy_attributes) {
                    auto it = mapping.policy_attribute_defaults.find(attr.attribute_name);
                    if (it != mapping.policy_attribute_defaults.end())
                        policy.policy_attributes[attr.attribute_name] = it->second;
                }
        }
        policy.rules.push_back(std::move(rule));
    }
    return out;
}

// --- Proposals ------------------------------------------------------------------------

std::vector<Proposal> propose_additions(const Hlp& hlp, const Landscape& ls, const Catalogue& cat,
                                        const Mapping& mapping) {
    auto candidates = candidate_controls(hlp, ls, cat, mapping);

    std::vector<const PathCandidates*> uncovered;
    for (const auto& pc : candidates.per_path)
        if (pc.controls.empty()) uncovered.push_back(&pc);
    if (candidates.mode == EnforcementMode::EndpointPair && candidates.pairs.empty())
        for (const auto& pc : candidates.per_path) uncovered.push_back(&pc);
    if (uncovered.empty())
        throw Error("PreconditionViolation", "propose_additions called on a coverable statement");

    auto required = required_capabilities(hlp, mapping);
    std::vector<std::string> capable;
    for (const auto& nsf_id : cat.nsf_ids()) {
        auto resolved = cat.resolve(nsf_id);
        if (std::all_of(required.begin(), required.end(),
                        [&](const std::string& c) { return resolved.owns(c); }))
            capable.push_back(nsf_id);
    }
    if (capable.empty())
        throw Error(errc::no_capable_nsf, "no catalogue NSF owns the required capabilities");

    std::set<std::string> cut;
    try {
        cut = landscape::cut_nodes(ls, hlp.subject, hlp.object);
    } catch (const Error&) {
        // no common node; fall back below
    }

    std::vector<Proposal> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto* pc : uncovered) {
        // Prefer a cut node on this path; otherwise the interior node nearest
        // the object.
        std::string placement;
        for (std::size_t i = 1; i + 1 < pc->path.size(); ++i)
            if (cut.count(pc->path[i]) && (placement.empty() || pc->path[i] < placement))
                placement = pc->path[i];
        if (placement.empty() && pc->path.size() > 2) placement = pc->path[pc->path.size() - 2];
        if (placement.empty()) placement = pc->path.back();

        for (const auto& nsf : capable)
            if (seen.insert({placement, nsf}).second) out.push_back({placement, nsf});
    }
    return out;
}

// --- Driver ---------------------------------------------------------------------------

RefinementOutcome refine_hlps(const std::vector<Hlp>& hlps, const Landscape& ls, const Catalogue& cat,
                              const Mapping& mapping, Strategy strategy, const DecisionCallback& callback) {
    RefinementOutcome outcome;
    int priority = 0;
    for (const auto& hlp : hlps) {
        ++priority;
        HlpRefinement result;
        result.hlp = hlp;
        result.candidates = candidate_controls(hlp, ls, cat, mapping);
        try {
            result.selection = select_controls(hlp, result.candidates, strategy, callback);
            auto mlps = generate_mlps(hlp, result.selection, mapping, ls, cat, priority);
            for (auto& [nsf, policy] : mlps) {
                auto& merged = outcome.mlps[nsf];
                if (merged.nsf_name.empty()) merged = std::move(policy);
                else
                    for (auto& rule : policy.rules) merged.rules.push_back(std::move(rule));
            }
            result.status = Status::Enforced;
        } catch (const Error& e) {
            if (e.code() == errc::uncoverable) {
                try {
                    result.proposals = propose_additions(hlp, ls, cat, mapping);
                    result.status = Status::UnenforceableWithProposal;
                    result.note = e.what();
                } catch (const Error& inner) {
                    result.status = Status::Unenforceable;
                    result.note = inner.what();
                }
            } else if (e.code() == "DecisionNeeded") {
                result.status = Status::NeedsDecision;
                result.note = e.what();
            } else {
                throw;
            }
        }
        outcome.results.push_back(std::move(result));
    }
    return outcome;
}

// --- Serialization ----------------------------------------------------------------------

nlohmann::json outcome_to_json(const RefinementOutcome& outcome) {
    json results = json::array();
    for (const auto& r : outcome.results) {
        json paths = json::array();
        for (const auto& pc : r.candidates.per_path) {
            json controls = json::array();
            for (const auto& c : pc.controls) controls.push_back({{"node", c.node_id}, {"nsf", c.nsf_id}});
            paths.push_back({{"path", pc.path}, {"controls", controls}});
        }
        json pairs = json::array();
        for (const auto& p : r.candidates.pairs)
            pairs.push_back({{"subjectSide", {{"node", p.subject_side.node_id}, {"nsf", p.subject_side.nsf_id}}},
                             {"objectSide", {{"node", p.object_side.node_id}, {"nsf", p.object_side.nsf_id}}}});
        json selection = json::array();
        for (const auto& s : r.selection) selection.push_back({{"node", s.node_id}, {"nsf", s.nsf_id}});
        json proposals = json::array();
        for (const auto& p : r.proposals) proposals.push_back({{"node", p.node_id}, {"nsf", p.nsf_id}});
        json entry = {{"hlp",
                       {{"subject", r.hlp.subject},
                        {"action", r.hlp.action},
                        {"object", r.hlp.object},
                        {"options", r.hlp.options}}},
                      {"mode", to_string(r.candidates.mode)},
                      {"candidates", paths},
                      {"selection", selection},
                      {"proposals", proposals},
                      {"status", to_string(r.status)}};
        if (!r.candidates.pairs.empty()) entry["endpointPairs"] = pairs;
        if (!r.note.empty()) entry["note"] = r.note;
        results.push_back(std::move(entry));
    }
    json mlps = json::object();
    for (const auto& [nsf, policy] : outcome.mlps) mlps[nsf] = mlp::to_document(policy);
    return {{"results", results}, {"mlps", mlps}};
}

} // namespace capforge::refine
