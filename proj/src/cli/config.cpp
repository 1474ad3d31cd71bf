#include "latocc/cli/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include <json.hpp>

#include "latocc/io.hpp"

namespace latocc {

namespace {

std::string join_key(std::string_view a, std::string_view b) {
    std::string k(a);
    k += '.';
    k += b;
    return k;
}

std::string type_error(std::string_view key, std::string_view want) {
    return "config key '" + std::string(key) + "' must be " + std::string(want);
}

}  // namespace

const ConfigValue* ConfigMap::find(std::string_view section, std::string_view key) const {
    if (!section.empty()) {
        const auto it = values_.find(join_key(section, key));
        if (it != values_.end()) return &it->second;
    }
    const auto it = values_.find(std::string(key));
    return it == values_.end() ? nullptr : &it->second;
}

std::optional<std::string> ConfigMap::get_string(std::string_view section, std::string_view key) const {
    const ConfigValue* v = find(section, key);
    if (v == nullptr) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(v)) return *s;
    throw UsageError(type_error(key, "a string"));
}

std::optional<double> ConfigMap::get_double(std::string_view section, std::string_view key) const {
    const ConfigValue* v = find(section, key);
    if (v == nullptr) return std::nullopt;
    if (const auto* d = std::get_if<double>(v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
    throw UsageError(type_error(key, "a number"));
}

std::optional<std::int64_t> ConfigMap::get_int(std::string_view section, std::string_view key) const {
    const ConfigValue* v = find(section, key);
    if (v == nullptr) return std::nullopt;
    if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
    throw UsageError(type_error(key, "an integer"));
}

std::optional<bool> ConfigMap::get_bool(std::string_view section, std::string_view key) const {
    const ConfigValue* v = find(section, key);
    if (v == nullptr) return std::nullopt;
    if (const auto* b = std::get_if<bool>(v)) return *b;
    throw UsageError(type_error(key, "true or false"));
}

std::optional<std::vector<double>> ConfigMap::get_doubles(std::string_view section,
                                                          std::string_view key) const {
    const ConfigValue* v = find(section, key);
    if (v == nullptr) return std::nullopt;
    if (const auto* a = std::get_if<std::vector<double>>(v)) return *a;
    throw UsageError(type_error(key, "an array of numbers"));
}

// --- TOML subset --------------------------------------------------------------

namespace {

class TomlLine {
public:
    TomlLine(std::string_view text, std::size_t line_no) : s_(text), line_(line_no) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw UsageError("config line " + std::to_string(line_) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }
    bool at_end_or_comment() {
        skip_ws();
        return pos_ >= s_.size() || s_[pos_] == '#';
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!consume(c)) fail(std::string("expected '") + c + "'");
    }

    std::string key() {
        skip_ws();
        std::string out;
        for (;;) {
            skip_ws();
            if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) {
                out += quoted();
            } else {
                const std::size_t b = pos_;
                while (pos_ < s_.size() &&
                       (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                        s_[pos_] == '-')) {
                    ++pos_;
                }
                if (b == pos_) fail("expected a key");
                out.append(s_.substr(b, pos_ - b));
            }
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == '.') {
                ++pos_;
                out += '.';
                continue;
            }
            return out;
        }
    }

    std::string quoted() {
        const char q = s_[pos_++];
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != q) {
            char c = s_[pos_++];
            if (q == '"' && c == '\\') {
                if (pos_ >= s_.size()) fail("unterminated escape");
                const char e = s_[pos_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '\\': c = '\\'; break;
                    case '"': c = '"'; break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            }
            out += c;
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    ConfigValue value() {
        skip_ws();
        if (pos_ >= s_.size()) fail("missing value");
        const char c = s_[pos_];
        if (c == '"' || c == '\'') return quoted();
        if (c == '[') {
            ++pos_;
            std::vector<double> out;
            if (consume(']')) return out;
            for (;;) {
                const ConfigValue v = scalar();
                if (const auto* d = std::get_if<double>(&v)) {
                    out.push_back(*d);
                } else if (const auto* i = std::get_if<std::int64_t>(&v)) {
                    out.push_back(static_cast<double>(*i));
                } else {
                    fail("only numeric arrays are supported");
                }
                if (consume(']')) return out;
                expect(',');
                if (consume(']')) return out;
            }
        }
        return scalar();
    }

private:
    ConfigValue scalar() {
        skip_ws();
        const std::size_t b = pos_;
        while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' &&
               s_[pos_] != ' ' && s_[pos_] != '\t') {
            ++pos_;
        }
        std::string tok(s_.substr(b, pos_ - b));
        if (tok.empty()) fail("missing value");
        if (tok == "true") return true;
        if (tok == "false") return false;
        // Bare local date, e.g. 1961-01-01.
        if (tok.size() == 10 && tok[4] == '-' && tok[7] == '-') return tok;
        std::string digits;
        for (char ch : tok) {
            if (ch != '_') digits += ch;
        }
        const char* first = digits.data() + (digits[0] == '+' ? 1 : 0);
        const char* last = digits.data() + digits.size();
        if (digits.find_first_of(".eE") == std::string::npos && digits != "inf" && digits != "nan") {
            std::int64_t i = 0;
            const auto r = std::from_chars(first, last, i);
            if (r.ec == std::errc() && r.ptr == last) return i;
        } else {
            double d = 0;
            const auto r = std::from_chars(first, last, d);
            if (r.ec == std::errc() && r.ptr == last && std::isfinite(d)) return d;
        }
        fail("cannot parse value '" + tok + "'");
    }

    std::string_view s_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

void flatten_json(const nlohmann::json& j, const std::string& prefix, ConfigMap& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        const nlohmann::json& v = it.value();
        if (v.is_object()) {
            flatten_json(v, key, out);
        } else if (v.is_boolean()) {
            out.set(key, v.get<bool>());
        } else if (v.is_number_integer()) {
            out.set(key, v.get<std::int64_t>());
        } else if (v.is_number()) {
            out.set(key, v.get<double>());
        } else if (v.is_string()) {
            out.set(key, v.get<std::string>());
        } else if (v.is_array()) {
            std::vector<double> a;
            for (const auto& x : v) {
                if (!x.is_number()) throw UsageError("config key '" + key + "': only numeric arrays are supported");
                a.push_back(x.get<double>());
            }
            out.set(key, std::move(a));
        } else if (!v.is_null()) {
            throw UsageError("config key '" + key + "' has an unsupported value");
        }
    }
}

}  // namespace

ConfigMap parse_toml(std::string_view text) {
    ConfigMap out;
    std::string table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

        TomlLine line(raw, line_no);
        if (line.at_end_or_comment()) continue;
        if (line.consume('[')) {
            if (line.consume('[')) line.fail("arrays of tables are not supported");
            table = line.key();
            line.expect(']');
            if (!line.at_end_or_comment()) line.fail("trailing characters after table header");
            continue;
        }
        const std::string key = line.key();
        line.expect('=');
        ConfigValue v = line.value();
        if (!line.at_end_or_comment()) line.fail("trailing characters after value");
        const std::string full = table.empty() ? key : table + "." + key;
        if (out.contains(full)) line.fail("duplicate key '" + full + "'");
        out.set(full, std::move(v));
    }
    return out;
}

ConfigMap parse_json_config(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config: top level must be an object");
    ConfigMap out;
    flatten_json(j, "", out);
    return out;
}

ConfigMap parse_config(std::string_view text) {
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return c == '{' ? parse_json_config(text) : parse_toml(text);
    }
    return {};
}

ConfigMap load_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const DataError&) {
        throw UsageError("cannot read config file " + path);
    }
    return parse_config(text);
}

}  // namespace latocc
