#pragma once

#include "capforge/catalogue.hpp"
#include "capforge/values.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace capforge::mlp {

// Condition operations as spelled in MLP documents. The catalogue-side
// operators map onto them: exactMatch -> EQUAL, notEqualTo -> NOT_EQUAL_TO,
// regex -> REGEX; `range` instead admits Range values under EQUAL/NOT_EQUAL_TO.
enum class Operation { Equal, NotEqualTo, Regex };

const char* to_string(Operation op);
std::optional<Operation> operation_from_string(const std::string& s);

struct ConditionInstance {
    std::string capability;
    Operation operation = Operation::Equal;
    std::vector<Value> values; // non-empty
};

struct ActionInstance {
    std::string capability;
    std::optional<std::string> value; // required iff the descriptor's value type != none
};

enum class Evaluation { AllOf, AnyOf };

const char* to_string(Evaluation e);

struct MlpRule {
    std::string id;
    std::optional<std::string> rule_type;
    std::optional<std::string> description;
    std::optional<std::string> label;
    std::map<std::string, std::string> external_data; // e.g. priority -> "1"
    std::vector<ConditionInstance> conditions;
    std::vector<ActionInstance> actions;
    Evaluation evaluation = Evaluation::AllOf;
};

struct DefaultAction {
    std::string capability;
    std::optional<std::string> value;
};

struct MlpPolicy {
    std::string nsf_name;
    std::map<std::string, std::string> policy_attributes; // e.g. targetRuleSet -> OUTPUT
    std::vector<MlpRule> rules;
    std::optional<DefaultAction> default_action;
};

// The test universe: one literal per condition capability.
struct Packet {
    std::map<std::string, std::string> attributes;
};

enum class Severity { Warning, Error };

struct Diagnostic {
    Severity severity = Severity::Error;
    // Stable category: ownership | operator | type | structure | external |
    // mandatory | attributes | dependency-order
    std::string code;
    std::string rule_id;    // empty for policy-level findings
    std::string capability; // empty when not capability-bound
    std::string message;
};

bool has_errors(const std::vector<Diagnostic>& diags);

// True when no error diagnostic falls in a category the emitted abstract
// language can express (ownership/operator/type/structure). Cross-field
// checks (external, mandatory, attributes) stay in validate_mlp.
bool schema_expressible_clean(const std::vector<Diagnostic>& diags);

// --- Operations --------------------------------------------------------------

MlpPolicy parse_mlp(const nlohmann::json& document, const std::string& origin = "$");
MlpPolicy parse_mlp_file(const std::string& path);
nlohmann::json to_document(const MlpPolicy& policy);

std::vector<Diagnostic> validate_mlp(const MlpPolicy& policy, const catalogue::ResolvedNsf& nsf,
                                     const catalogue::Catalogue& cat);

bool matches(const ConditionInstance& condition, const Packet& packet,
             const catalogue::Catalogue& cat);
bool match_rule(const MlpRule& rule, const Packet& packet, const catalogue::Catalogue& cat);

struct MatchOutcome {
    bool decided = false;                          // false => NoDecision
    std::vector<ActionInstance> actions;
    std::optional<std::string> rule_id;            // absent when the default action fired
    bool default_action_used = false;
};

// Applies the NSF's resolution strategy (FMR over the priority external
// datum, ties by document order). `strategy` may be omitted for policies
// evaluated against strategy-less NSFs; rules then apply in document order.
MatchOutcome match_policy(const MlpPolicy& policy, const Packet& packet,
                          const catalogue::Catalogue& cat,
                          const std::optional<catalogue::ResolutionStrategyDetails>& strategy);

// Capability ids instantiated by the policy (conditions, actions, default).
std::set<std::string> used_capabilities(const MlpPolicy& policy);

// Rule indices in enforcement order for the given strategy.
std::vector<std::size_t> enforcement_order(const MlpPolicy& policy,
                                           const std::optional<catalogue::ResolutionStrategyDetails>& strategy);

} // namespace capforge::mlp

namespace capforge::catalogue {

// Catalogue query: NSFs able to enforce the policy — they own every
// instantiated capability and their strategy's external data names appear in
// every rule. Throws InvalidPolicy via parse failures upstream.
std::vector<std::string> enforcers(const Catalogue& cat, const mlp::MlpPolicy& policy);

} // namespace capforge::catalogue
