// include/ariadne/json_fields.hpp
// Strict reading of JSON config objects: every key must be known, every
// value must have the right type, missing keys keep the caller's default.
#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "ariadne/error.hpp"

namespace ariadne {

class FieldReader {
public:
    FieldReader(const nlohmann::json& obj, std::string section) : obj_(obj), section_(std::move(section)) {
        if (!obj_.is_object()) throw ConfigError(section_ + ": expected a JSON object");
    }

    template <class T>
    FieldReader& read(const std::string& key, T& out) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return *this;
        const auto& v = *it;
        bool ok = false;
        if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
        else if constexpr (std::is_integral_v<T>) ok = v.is_number_integer();
        else if constexpr (std::is_floating_point_v<T>) ok = v.is_number();
        else if constexpr (std::is_same_v<T, std::string>) ok = v.is_string();
        else ok = true;
        if (!ok) throw ConfigError(section_ + "." + key + ": wrong value type");
        if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
                throw ConfigError(section_ + "." + key + ": must be non-negative");
        }
        out = v.get<T>();
        return *this;
    }

    // Nested object handed to `f(const json&)` when present.
    template <class F>
    FieldReader& section(const std::string& key, F&& f) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it != obj_.end()) f(*it);
        return *this;
    }

    // Throws on the first key that was never asked for.
    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(section_ + ": unknown key `" + it.key() + "`");
    }

private:
    const nlohmann::json& obj_;
    std::string section_;
    std::set<std::string> seen_;
};

}  // namespace ariadne
