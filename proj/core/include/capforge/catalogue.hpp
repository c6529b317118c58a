#pragma once

#include "capforge/values.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace capforge::catalogue {

enum class CapabilityKind {
    Condition,
    Action,
    Event,
    Evaluation,
    ResolutionStrategy,
    DefaultAction,
};

const char* to_string(CapabilityKind k);
std::optional<CapabilityKind> capability_kind_from_string(const std::string& s);

// Operators a condition capability permits on its instances.
enum class Operator { ExactMatch, NotEqualTo, Range, Regex };

const char* to_string(Operator op);
std::optional<Operator> operator_from_string(const std::string& s);

struct CapabilityDescriptor {
    std::string id;
    CapabilityKind kind = CapabilityKind::Condition;
    ValueType value_type = ValueType::None;
    std::set<Operator> operators;          // non-empty iff kind == Condition
    std::vector<std::string> enum_values;  // legal literals when value_type == Enum

    bool permits(Operator op) const { return operators.count(op) > 0; }
};

struct PolicyAttributeSpec {
    std::string attribute_name;
};

struct NsfPolicyDetails {
    std::string rule_start;
    std::string rule_end;
    std::string policy_trailer;
    std::string policy_encoding = "ascii"; // "ascii" or "utf-8"
    std::vector<std::string> mandatory_capabilities;
    std::vector<PolicyAttributeSpec> policy_attributes;
};

struct CommandNameCondition {
    std::string attribute_name;
    std::string attribute_value;
};

struct CommandName {
    std::string real_command_name;
    std::optional<CommandNameCondition> condition;
};

// How the join string applies between adjacent value elements. Stored as an
// annotation: the join always uses real_concatenator (see decisions in the
// translator for why a restrictive reading is not viable).
struct ConcatenatorApplicability {
    std::string pre_variable;  // "elementValue" | "elementRange"
    std::string post_variable;
};

struct Concatenator {
    std::string operator_type = "union";
    std::string real_concatenator;
    std::optional<ConcatenatorApplicability> applicability;
    std::vector<CommandName> new_command_names; // replace the base command when joining
};

enum class DependencyMode { Presence, Absence };

struct Dependency {
    DependencyMode mode = DependencyMode::Presence;
    std::string of_capability;
    std::vector<std::string> required_value; // any-of; empty = presence/absence alone

    std::string describe() const;
};

struct MergeGroup {
    std::string group_id;
    int slot = 1;                  // 1-based slot in the template
    std::string template_text;     // numbered slots {1}..{n}; lowest slot carries it
    std::string emit_once_prefix;
};

enum class PreferredExpansion { Auto, Always, Never };

const char* to_string(PreferredExpansion p);

// Per-(NSF, capability) compilation directives.
struct TranslationDetails {
    std::string capability;
    std::vector<CommandName> command_names;
    std::string prefix;
    std::string suffix;
    std::string value_separator = " ";
    std::string range_separator = "-";
    std::optional<Concatenator> body_concatenator;
    std::vector<Dependency> dependencies;
    std::optional<MergeGroup> merge_group;
    PreferredExpansion preferred_expansion = PreferredExpansion::Auto;
};

struct ExternalDataSpec {
    std::string name;
    ValueType value_type = ValueType::Integer;
};

enum class Ordering { Ascending, Descending };

struct ResolutionStrategyDetails {
    std::string strategy_capability;
    std::vector<ExternalDataSpec> required_external_data;
    Ordering ordering = Ordering::Ascending;
};

struct NsfDescriptor {
    std::string id;
    std::set<std::string> capability_refs;
    std::vector<std::string> includes;
    std::optional<NsfPolicyDetails> policy_details;
    std::map<std::string, TranslationDetails> translation_details;
    std::optional<std::string> resolution_strategy;
    std::set<std::string> default_action_pool;
};

// Transitive view of an NSF: own + included capabilities, with decorations
// merged nearest-definition-first (the NSF's own details beat any include's;
// shallower includes beat deeper ones; list order breaks depth ties).
struct ResolvedNsf {
    std::string id;
    std::set<std::string> capabilities;
    std::map<std::string, TranslationDetails> translation_details;
    std::optional<NsfPolicyDetails> policy_details;
    std::optional<std::string> resolution_strategy;
    std::optional<ResolutionStrategyDetails> strategy_details;
    std::set<std::string> default_action_pool;

    bool owns(const std::string& capability_id) const { return capabilities.count(capability_id) > 0; }
    const TranslationDetails* details_for(const std::string& capability_id) const;
};

enum class Relation { Equivalent, Disjoint, ProperSubsetAofB, ProperSubsetBofA, Overlapping };

const char* to_string(Relation r);

struct ComparisonResult {
    Relation relation = Relation::Disjoint;
    std::set<std::string> shared;
};

class Catalogue {
public:
    // Builds and validates from in-memory descriptors (used by tests and by
    // the document loader). Checks reference resolution, include acyclicity
    // and all per-descriptor invariants.
    static Catalogue build(std::vector<CapabilityDescriptor> capabilities,
                           std::vector<NsfDescriptor> nsfs,
                           std::vector<ResolutionStrategyDetails> strategy_details = {});

    const CapabilityDescriptor* find_capability(const std::string& id) const;
    const CapabilityDescriptor& capability(const std::string& id) const; // throws UnknownCapability
    const NsfDescriptor* find_nsf(const std::string& id) const;
    const NsfDescriptor& nsf(const std::string& id) const;               // throws UnknownNsf

    std::vector<std::string> nsf_ids() const;        // lexicographic
    std::vector<std::string> capability_ids() const; // lexicographic

    const ResolutionStrategyDetails* strategy_details_for(const std::string& capability_id) const;

    ResolvedNsf resolve(const std::string& nsf_id) const;

private:
    std::map<std::string, CapabilityDescriptor> capabilities_;
    std::map<std::string, NsfDescriptor> nsfs_;
    std::map<std::string, ResolutionStrategyDetails> strategy_details_;
};

// --- Operations ------------------------------------------------------------

// Parses and validates a catalogue document (see fixtures/catalogue for the
// format). Accepts a parsed JSON value; load_catalogue_file reads from disk,
// where a directory is loaded as the merge of its *.json files (sorted).
Catalogue load_catalogue(const nlohmann::json& document, const std::string& origin = "$");
Catalogue load_catalogue_file(const std::string& path);

ComparisonResult compare(const Catalogue& cat, const std::string& a, const std::string& b);

// NSFs (other than nsf_id) whose resolved set is a strict-or-equal superset,
// sorted lexicographically.
std::vector<std::string> substitutes(const Catalogue& cat, const std::string& nsf_id);

// NSFs owning all listed capabilities. Throws UnknownCapability.
std::vector<std::string> search(const Catalogue& cat, const std::vector<std::string>& capability_ids);

nlohmann::json comparison_to_json(const ComparisonResult& r);

} // namespace capforge::catalogue
