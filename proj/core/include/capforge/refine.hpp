#pragma once

#include "capforge/catalogue.hpp"
#include "capforge/landscape.hpp"
#include "capforge/mlp.hpp"

#include <functional>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace capforge::refine {

enum class EnforcementMode { AnyPathAllow, AllPathsDeny, EndpointPair };

const char* to_string(EnforcementMode m);

struct RuleTemplate {
    std::string subject_condition;
    std::string object_condition;
    std::string decision_action;
};

struct FixedAction {
    std::string capability;
    std::optional<std::string> value;
};

struct VerbSpec {
    std::set<std::string> required_capabilities;
    RuleTemplate rule_template;
    EnforcementMode enforcement_mode = EnforcementMode::AllPathsDeny;
    std::vector<FixedAction> fixed_actions;
};

// How one HLP option key contributes to the rule. Conditions add a condition
// instance; `replaces` drops template slots (ban rules carry no addresses);
// `decision` swaps the verb's decision action per verb.
struct OptionSpec {
    std::optional<std::string> condition;
    mlp::Operation operation = mlp::Operation::Equal;
    std::optional<std::string> split; // value list separator
    std::set<std::string> replaces;   // subset of {"subject", "object"}
    std::map<std::string, std::string> decision_by_verb;
    std::optional<std::string> action; // option value becomes this action's value
};

// The verb->capability mapping is data, not code: new verbs ship as mapping
// entries.
struct Mapping {
    std::map<std::string, VerbSpec> verbs;
    std::map<std::string, OptionSpec> options;
    std::map<std::string, std::string> policy_attribute_defaults;
    std::map<std::string, std::string> mandatory_capability_values;
};

Mapping load_mapping(const nlohmann::json& document, const std::string& origin = "$");
Mapping load_mapping_file(const std::string& path);

struct CandidateControl {
    std::string node_id;
    std::string nsf_id;

    auto operator<=>(const CandidateControl&) const = default;
};

struct PathCandidates {
    landscape::Path path;
    std::vector<CandidateControl> controls; // sorted by node, then nsf
};

struct EndpointPairCandidate {
    CandidateControl subject_side;
    CandidateControl object_side;

    auto operator<=>(const EndpointPairCandidate&) const = default;
};

struct Candidates {
    EnforcementMode mode = EnforcementMode::AllPathsDeny;
    std::vector<PathCandidates> per_path;          // filtering modes
    std::vector<EndpointPairCandidate> pairs;      // endpoint_pair mode, deduplicated
    std::vector<landscape::Path> alternate_paths;  // allow mode: paths not chosen
    std::optional<std::size_t> chosen_path;        // allow mode: index into per_path
};

enum class Strategy { MinControls, DefenseInDepth, Interactive };

const char* to_string(Strategy s);
std::optional<Strategy> strategy_from_string(const std::string& s);

// Interactive selection callback: given the path and its candidates, return
// the index of the control to use.
using DecisionCallback =
    std::function<std::size_t(const landscape::Hlp&, const landscape::Path&,
                              const std::vector<CandidateControl>&)>;

struct Proposal {
    std::string node_id;
    std::string nsf_id;
};

enum class Status { Enforced, NeedsDecision, UnenforceableWithProposal, Unenforceable };

const char* to_string(Status s);

struct HlpRefinement {
    landscape::Hlp hlp;
    Candidates candidates;
    std::vector<CandidateControl> selection;
    std::vector<Proposal> proposals;
    Status status = Status::Unenforceable;
    std::string note; // human-readable failure or decision summary
};

struct RefinementOutcome {
    std::vector<HlpRefinement> results;
    std::map<std::string, mlp::MlpPolicy> mlps; // keyed by nsf id, merged across HLPs
};

// --- Operations --------------------------------------------------------------

std::set<std::string> required_capabilities(const landscape::Hlp& hlp, const Mapping& mapping);

Candidates candidate_controls(const landscape::Hlp& hlp, const landscape::Landscape& ls,
                              const catalogue::Catalogue& cat, const Mapping& mapping);

std::vector<CandidateControl> select_controls(const landscape::Hlp& hlp, const Candidates& candidates,
                                              Strategy strategy, const DecisionCallback& callback = {});

// Instantiates the verb template for every selected control; priority is the
// 1-based HLP document position.
std::map<std::string, mlp::MlpPolicy> generate_mlps(const landscape::Hlp& hlp,
                                                    const std::vector<CandidateControl>& selection,
                                                    const Mapping& mapping,
                                                    const landscape::Landscape& ls,
                                                    const catalogue::Catalogue& cat, int priority);

std::vector<Proposal> propose_additions(const landscape::Hlp& hlp, const landscape::Landscape& ls,
                                        const catalogue::Catalogue& cat, const Mapping& mapping);

RefinementOutcome refine_hlps(const std::vector<landscape::Hlp>& hlps, const landscape::Landscape& ls,
                              const catalogue::Catalogue& cat, const Mapping& mapping, Strategy strategy,
                              const DecisionCallback& callback = {});

nlohmann::json outcome_to_json(const RefinementOutcome& outcome);

} // namespace capforge::refine
