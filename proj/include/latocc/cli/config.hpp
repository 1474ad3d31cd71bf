#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "latocc/errors.hpp"

namespace latocc {

/// Bad flags or config file; maps to exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

using ConfigValue = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

/// Flat key/value view of a config file. Tables nest with dots, so
/// `[simulate] seed = 3` and `{"simulate": {"seed": 3}}` both give key
/// "simulate.seed".
class ConfigMap {
public:
    void set(std::string key, ConfigValue value) { values_[std::move(key)] = std::move(value); }
    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, ConfigValue>& values() const { return values_; }

    /// Looks up "<section>.<key>" first, then "<key>".
    const ConfigValue* find(std::string_view section, std::string_view key) const;

    std::optional<std::string> get_string(std::string_view section, std::string_view key) const;
    std::optional<double> get_double(std::string_view section, std::string_view key) const;
    std::optional<std::int64_t> get_int(std::string_view section, std::string_view key) const;
    std::optional<bool> get_bool(std::string_view section, std::string_view key) const;
    std::optional<std::vector<double>> get_doubles(std::string_view section, std::string_view key) const;

private:
    std::map<std::string, ConfigValue> values_;
};

/// Supported TOML: comments, [table] / [a.b] headers, key = value with bare
/// or quoted keys, basic and literal strings, integers, floats, booleans,
/// bare dates (kept as strings), and single-line arrays of numbers.
ConfigMap parse_toml(std::string_view text);
ConfigMap parse_json_config(std::string_view text);
/// Picks JSON when the first non-blank character is '{', TOML otherwise.
ConfigMap parse_config(std::string_view text);
ConfigMap load_config(const std::string& path);

}  // namespace latocc
