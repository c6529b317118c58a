#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace capforge {

// Every failure carries a stable machine-readable code (used verbatim in CLI
// and HTTP error payloads) plus a human message and an optional detail string.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, std::string detail = {})
        : std::runtime_error(message), code_(std::move(code)), detail_(std::move(detail)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string code_;
    std::string detail_;
};

namespace errc {
// Catalogue
inline constexpr const char* parse_error = "ParseError";
inline constexpr const char* dangling_reference = "DanglingReference";
inline constexpr const char* include_cycle = "IncludeCycle";
inline constexpr const char* unknown_nsf = "UnknownNsf";
inline constexpr const char* unknown_capability = "UnknownCapability";
inline constexpr const char* invalid_policy = "InvalidPolicy";
// MLP
inline constexpr const char* type_error = "TypeError";
inline constexpr const char* missing_attribute = "MissingAttribute";
// Translator
inline constexpr const char* dependency_violation = "DependencyViolation";
inline constexpr const char* unsatisfiable_negated_union = "UnsatisfiableNegatedUnion";
inline constexpr const char* mandatory_capability_absent = "MandatoryCapabilityAbsent";
inline constexpr const char* no_applicable_command_name = "NoApplicableCommandName";
inline constexpr const char* incomplete_merge_group = "IncompleteMergeGroup";
// Landscape
inline constexpr const char* dangling_link = "DanglingLink";
inline constexpr const char* unknown_entity = "UnknownEntity";
inline constexpr const char* no_path = "NoPath";
inline constexpr const char* path_explosion = "PathExplosion";
// Refinement
inline constexpr const char* unknown_verb = "UnknownVerb";
inline constexpr const char* unsupported_option = "UnsupportedOption";
inline constexpr const char* uncoverable = "Uncoverable";
inline constexpr const char* no_capable_nsf = "NoCapableNsfInCatalogue";
inline constexpr const char* template_slot_unfillable = "TemplateSlotUnfillable";
// Remediation
inline constexpr const char* grammar_error = "GrammarError";
inline constexpr const char* no_applicable_recipe = "NoApplicableRecipe";
inline constexpr const char* unbound_variable = "UnboundVariable";
} // namespace errc

} // namespace capforge
