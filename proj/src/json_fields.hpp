#pragma once

// Field accessors shared by the asset loaders. Every failure names the
// offending record through `where` so schema errors are actionable.

#include <optional>
#include <string>
#include <vector>

#include "usckc/error.hpp"
#include "usckc/io.hpp"

namespace usckc::detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
    throw ValidationError(where + ": " + what);
}

inline const json& require_object(const json& j, const std::string& where) {
    if (!j.is_object()) schema_error(where, "expected an object");
    return j;
}

inline const json& require_field(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(where, std::string("missing field '") + key + "'");
    return *it;
}

inline std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require_field(obj, key, where);
    if (!v.is_string()) schema_error(where, std::string("field '") + key + "' must be a string");
    std::string s = v.get<std::string>();
    if (s.empty()) schema_error(where, std::string("field '") + key + "' must be nonempty");
    return s;
}

inline std::optional<std::string> optional_string(const json& obj, const char* key,
                                                  const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) schema_error(where, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

inline const json& require_array(const json& obj, const char* key, const std::string& where) {
    const json& v = require_field(obj, key, where);
    if (!v.is_array()) schema_error(where, std::string("field '") + key + "' must be an array");
    return v;
}

inline std::vector<std::string> string_list(const json& obj, const char* key,
                                            const std::string& where, bool required) {
    std::vector<std::string> out;
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        if (required) schema_error(where, std::string("missing field '") + key + "'");
        return out;
    }
    if (!it->is_array()) schema_error(where, std::string("field '") + key + "' must be an array");
    for (const auto& e : *it) {
        if (!e.is_string() || e.get<std::string>().empty())
            schema_error(where, std::string("field '") + key + "' must hold nonempty strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

inline double require_number(const json& v, const std::string& where) {
    if (!v.is_number()) schema_error(where, "expected a number");
    return v.get<double>();
}

inline bool optional_bool(const json& obj, const char* key, const std::string& where,
                          bool fallback = false) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    if (!it->is_boolean()) schema_error(where, std::string("field '") + key + "' must be a boolean");
    return it->get<bool>();
}

}  // namespace usckc::detail
