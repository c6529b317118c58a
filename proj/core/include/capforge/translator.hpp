#pragma once

#include "capforge/catalogue.hpp"
#include "capforge/mlp.hpp"

#include <map>
#include <string>
#include <vector>

namespace capforge::translator {

// Per-condition expansion decision. InlineJoin keeps one token (joined by the
// concatenator when several values are present); Expand multiplies the rule
// by the condition's value count; RepeatConjunction rewrites a negated union
// into consecutive single-valued NOT_EQUAL_TO conditions in the same rule.
enum class Decision { InlineJoin, Expand, RepeatConjunction };

struct ExpansionPlan {
    std::vector<Decision> decisions; // aligned with rule.conditions
    std::size_t expected_rule_count = 1;
};

struct TranslateOptions {
    // Injects a missing dependency target when its required value is a single
    // literal (off by default: dependencies are checked, never guessed).
    bool auto_satisfy = false;
};

ExpansionPlan plan_expansion(const mlp::MlpRule& rule, const catalogue::ResolvedNsf& nsf);

std::vector<mlp::MlpRule> expand_rule(const mlp::MlpRule& rule, const ExpansionPlan& plan);

// First command name whose condition matches the instance attributes, else
// the unconditioned one. When `joining`, the concatenator's replacement
// command names take precedence under the same matching rule.
std::string select_command_name(const std::map<std::string, std::string>& instance_attributes,
                                const catalogue::TranslationDetails& details, bool joining);

// Compiles a validated policy into the NSF's native configuration text.
// Lines end with LF; tokens are separated by exactly one space; rules are
// emitted in resolution-strategy order (FMR: ascending priority, document
// order on ties). `attributes` overlay the policy's own attributes.
std::string translate(const mlp::MlpPolicy& policy, const catalogue::ResolvedNsf& nsf,
                      const catalogue::Catalogue& cat,
                      const std::map<std::string, std::string>& attributes = {},
                      const TranslateOptions& options = {});

} // namespace capforge::translator
