#include "capforge/docjson.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace capforge::docjson {

json parse_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(errc::parse_error, origin + ": " + e.what());
    }
}

json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::parse_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

std::string join_path(const std::string& base, const std::string& key) {
    return base + "." + key;
}

std::string index_path(const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw Error(errc::parse_error, path + ": expected object");
    return j;
}

const json& require_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw Error(errc::parse_error, path + ": expected array");
    return j;
}

std::string require_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw Error(errc::parse_error, path + ": expected string");
    return j.get<std::string>();
}

std::string get_string(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) throw Error(errc::parse_error, join_path(path, key) + ": missing");
    return require_string(obj.at(key), join_path(path, key));
}

std::optional<std::string> opt_string(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    return require_string(obj.at(key), join_path(path, key));
}

std::vector<std::string> string_array(const json& obj, const char* key, const std::string& path) {
    std::vector<std::string> out;
    if (!obj.contains(key)) return out;
    const auto& arr = require_array(obj.at(key), join_path(path, key));
    for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(require_string(arr[i], index_path(join_path(path, key), i)));
    return out;
}

std::optional<double> opt_number(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw Error(errc::parse_error, join_path(path, key) + ": expected number");
    return v.get<double>();
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = std::any_of(allowed.begin(), allowed.end(),
                                 [&](const char* k) { return it.key() == k; });
        if (!known) throw Error(errc::parse_error, join_path(path, it.key()) + ": unknown field");
    }
}

} // namespace capforge::docjson
