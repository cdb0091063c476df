#pragma once

// Field access helpers for the JSON file formats. Every failure becomes a
// ParseError naming the line (syntax) or the field path (shape).

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>

#include <json.hpp>

#include "crowdteach/error.hpp"

namespace crowdteach::detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json parse_json(std::string_view text) {
    try {
        return ordered_json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const std::size_t line =
            1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
        throw ParseError("line " + std::to_string(line) + ": " + e.what());
    }
}

inline const ordered_json& field(const ordered_json& obj, const char* name,
                                 const std::string& path) {
    auto it = obj.find(name);
    if (it == obj.end()) {
        throw ParseError((path.empty() ? std::string() : path + ".") + name + ": missing field");
    }
    return *it;
}

inline void require_array(const ordered_json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path + ": expected an array");
}

inline double require_number(const ordered_json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path + ": expected a number");
    return j.get<double>();
}

inline long long require_integer(const ordered_json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ParseError(path + ": expected an integer");
    return j.get<long long>();
}

inline const std::string& require_string(const ordered_json& j, const std::string& path) {
    if (!j.is_string()) throw ParseError(path + ": expected a string");
    return j.get_ref<const std::string&>();
}

}  // namespace crowdteach::detail
