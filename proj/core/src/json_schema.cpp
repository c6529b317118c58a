#include "capforge/json_schema.hpp"

#include "capforge/errors.hpp"

#include <map>
#include <regex>

namespace capforge::json_schema {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxErrors = 8;

// Schemas repeat a handful of patterns thousands of times across oneOf
// branches; compiling each once per thread keeps validation cheap.
const std::regex& compiled(const std::string& pattern) {
    thread_local std::map<std::string, std::regex> cache;
    auto it = cache.find(pattern);
    if (it == cache.end())
        it = cache.emplace(pattern, std::regex(pattern, std::regex::ECMAScript)).first;
    return it->second;
}

struct Context {
    const json* root = nullptr;
    ValidationResult* result = nullptr;

    void fail(const std::string& path, const std::string& reason) {
        result->valid = false;
        if (result->errors.size() < kMaxErrors) result->errors.push_back(path + ": " + reason);
    }
};

bool type_matches(const json& v, const std::string& type) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "number") return v.is_number();
    if (type == "integer") return v.is_number_integer();
    if (type == "boolean") return v.is_boolean();
    if (type == "null") return v.is_null();
    return false;
}

const json& resolve_ref(const json& root, const std::string& ref) {
    if (ref.rfind("#/", 0) != 0)
        throw Error(errc::parse_error, "unsupported $ref: " + ref);
    const json* cur = &root;
    std::size_t pos = 2;
    while (pos < ref.size()) {
        auto next = ref.find('/', pos);
        std::string key = ref.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        if (!cur->is_object() || !cur->contains(key))
            throw Error(errc::parse_error, "$ref target not found: " + ref);
        cur = &cur->at(key);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return *cur;
}

bool check(Context& ctx, const json& schema, const json& inst, const std::string& path);

// Validates without recording errors (for oneOf/anyOf branch trials).
bool silent_check(Context& ctx, const json& schema, const json& inst) {
    ValidationResult scratch;
    Context sub{ctx.root, &scratch};
    return check(sub, schema, inst, "");
}

bool check(Context& ctx, const json& schema, const json& inst, const std::string& path) {
    if (schema.is_boolean()) {
        if (!schema.get<bool>()) {
            ctx.fail(path, "schema false");
            return false;
        }
        return true;
    }
    if (!schema.is_object()) throw Error(errc::parse_error, "schema node must be object or bool");

    if (schema.contains("$ref"))
        return check(ctx, resolve_ref(*ctx.root, schema.at("$ref").get<std::string>()), inst, path);

    bool ok = true;

    if (schema.contains("type") && !type_matches(inst, schema.at("type").get<std::string>())) {
        ctx.fail(path, "expected type " + schema.at("type").get<std::string>());
        return false;
    }
    if (schema.contains("const") && inst != schema.at("const")) {
        ctx.fail(path, "does not match const");
        ok = false;
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& e : schema.at("enum"))
            if (inst == e) found = true;
        if (!found) {
            ctx.fail(path, "not in enum");
            ok = false;
        }
    }
    if (schema.contains("pattern") && inst.is_string()) {
        if (!std::regex_search(inst.get<std::string>(), compiled(schema.at("pattern").get<std::string>()))) {
            ctx.fail(path, "does not match pattern");
            ok = false;
        }
    }
    if (schema.contains("minimum") && inst.is_number() &&
        inst.get<double>() < schema.at("minimum").get<double>()) {
        ctx.fail(path, "below minimum");
        ok = false;
    }
    if (schema.contains("maximum") && inst.is_number() &&
        inst.get<double>() > schema.at("maximum").get<double>()) {
        ctx.fail(path, "above maximum");
        ok = false;
    }

    if (inst.is_object()) {
        if (schema.contains("required"))
            for (const auto& req : schema.at("required")) {
                if (!inst.contains(req.get<std::string>())) {
                    ctx.fail(path, "missing required member " + req.get<std::string>());
                    ok = false;
                }
            }
        const json* props = schema.contains("properties") ? &schema.at("properties") : nullptr;
        for (auto it = inst.begin(); it != inst.end(); ++it) {
            if (props && props->contains(it.key())) {
                if (!check(ctx, props->at(it.key()), it.value(), path + "." + it.key())) ok = false;
            } else if (schema.contains("additionalProperties")) {
                const auto& ap = schema.at("additionalProperties");
                if (ap.is_boolean() && !ap.get<bool>()) {
                    ctx.fail(path, "unexpected member " + it.key());
                    ok = false;
                } else if (ap.is_object()) {
                    if (!check(ctx, ap, it.value(), path + "." + it.key())) ok = false;
                }
            }
        }
    }

    if (inst.is_array()) {
        if (schema.contains("minItems") && inst.size() < schema.at("minItems").get<std::size_t>()) {
            ctx.fail(path, "fewer than minItems");
            ok = false;
        }
        if (schema.contains("maxItems") && inst.size() > schema.at("maxItems").get<std::size_t>()) {
            ctx.fail(path, "more than maxItems");
            ok = false;
        }
        if (schema.contains("items")) {
            const auto& items = schema.at("items");
            for (std::size_t i = 0; i < inst.size(); ++i)
                if (!check(ctx, items, inst[i], path + "[" + std::to_string(i) + "]")) ok = false;
        }
    }

    if (schema.contains("oneOf")) {
        int hits = 0;
        for (const auto& branch : schema.at("oneOf"))
            if (silent_check(ctx, branch, inst)) ++hits;
        if (hits != 1) {
            ctx.fail(path, "matched " + std::to_string(hits) + " oneOf branches");
            ok = false;
        }
    }
    if (schema.contains("anyOf")) {
        bool hit = false;
        for (const auto& branch : schema.at("anyOf"))
            if (silent_check(ctx, branch, inst)) hit = true;
        if (!hit) {
            ctx.fail(path, "matched no anyOf branch");
            ok = false;
        }
    }
    return ok;
}

} // namespace

ValidationResult validate(const nlohmann::json& schema, const nlohmann::json& instance) {
    ValidationResult result;
    Context ctx{&schema, &result};
    check(ctx, schema, instance, "$");
    return result;
}

} // namespace capforge::json_schema
