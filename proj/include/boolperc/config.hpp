// Run configuration: a flat key = value text format (a TOML subset with
// inline tables and arrays) read into JSON, plus typed access.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "boolperc/errors.hpp"
#include "boolperc/events.hpp"
#include "boolperc/measures.hpp"

namespace boolperc {

// Lines are `key = value`, `# comment` or `[section]`; keys below a section
// header are stored as "section.key". Values: numbers, "strings", true/false,
// [arrays] and { inline = tables }.
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json load_config_file(const std::string& path);

class RunConfig {
public:
    RunConfig() = default;
    explicit RunConfig(nlohmann::json values) : v_(std::move(values)) {}

    // Later layers win.
    void overlay(const nlohmann::json& layer);

    bool has(const std::string& key) const { return v_.contains(key) && !v_.at(key).is_null(); }
    template <class T>
    T get(const std::string& key, T fallback) const {
        if (!has(key)) return fallback;
        return convert<T>(key);
    }
    template <class T>
    T require(const std::string& key) const;

    int d() const;
    RadiusMeasure measure() const;
    EventSpec event() const;
    std::uint64_t seed() const;
    const nlohmann::json& json() const { return v_; }

private:
    template <class T>
    T convert(const std::string& key) const;

    nlohmann::json v_ = nlohmann::json::object();
};

template <class T>
T RunConfig::convert(const std::string& key) const {
    try {
        return v_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigInvalid("config key '" + key + "' has the wrong type");
    }
}

template <class T>
T RunConfig::require(const std::string& key) const {
    if (!has(key)) throw ConfigInvalid("missing required config key '" + key + "'");
    return convert<T>(key);
}

}  // namespace boolperc
