#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace capforge::json_schema {

// Evaluator for the JSON Schema subset the abstract-language generator emits:
// type, const, enum, pattern (ECMAScript), properties, required,
// additionalProperties (bool), items (schema or false), minItems, maxItems,
// oneOf, anyOf and local "#/$defs/..." references. Draft 2020-12 semantics.
struct ValidationResult {
    bool valid = true;
    std::vector<std::string> errors; // "path: reason", first few kept

    explicit operator bool() const { return valid; }
};

ValidationResult validate(const nlohmann::json& schema, const nlohmann::json& instance);

} // namespace capforge::json_schema
