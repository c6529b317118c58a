#pragma once

#include "capforge/errors.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace capforge::docjson {

using json = nlohmann::json;

// Strict, path-reporting accessors for the document formats. All failures
// throw ParseError naming the offending path (e.g. "$.nsfs[2].id").

json parse_text(const std::string& text, const std::string& origin);
json load_file(const std::string& path);

std::string join_path(const std::string& base, const std::string& key);
std::string index_path(const std::string& base, std::size_t i);

const json& require_object(const json& j, const std::string& path);
const json& require_array(const json& j, const std::string& path);

std::string require_string(const json& j, const std::string& path);
std::string get_string(const json& obj, const char* key, const std::string& path);
std::optional<std::string> opt_string(const json& obj, const char* key, const std::string& path);
std::vector<std::string> string_array(const json& obj, const char* key, const std::string& path);
std::optional<double> opt_number(const json& obj, const char* key, const std::string& path);

// Rejects object members outside `allowed` (strict formats keep documents and
// emitted schemas in agreement).
void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& path);

} // namespace capforge::docjson
