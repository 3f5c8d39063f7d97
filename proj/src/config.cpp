#include "grw/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace grw {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

KeyValues parse_key_value_text(const std::string& text, const std::string& origin) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        if (!kv.emplace(key, value).second) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

KeyValues load_config_source(const std::string& path) {
    const std::string text = read_file(path);
    const std::string stripped = trim(text);
    if (!stripped.empty() && stripped[0] == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(stripped);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path + ": " + e.what());
        }
        if (!doc.contains("config") || !doc["config"].is_object()) {
            throw ConfigError(path + ": JSON source has no embedded \"config\" object");
        }
        KeyValues kv;
        for (const auto& [key, value] : doc["config"].items()) {
            if (!value.is_string()) {
                throw ConfigError(path + ": embedded config value for '" + key +
                                  "' is not a string");
            }
            kv[key] = value.get<std::string>();
        }
        return kv;
    }
    return parse_key_value_text(text, path);
}

ResolvedConfig::ResolvedConfig(KeyValues defaults, const KeyValues& file_values,
                               const KeyValues& cli_values) {
    values_ = std::move(defaults);
    for (const auto& [key, value] : file_values) {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second = value;
    }
    for (const auto& [key, value] : cli_values) {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second = value;
    }
}

std::string ResolvedConfig::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
}

double ResolvedConfig::get_double(const std::string& key) const {
    const std::string s = get_string(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + s + "' is not a number");
    }
}

double ResolvedConfig::get_positive(const std::string& key) const {
    const double v = get_double(key);
    if (!(v > 0.0)) {
        throw ConfigError("config key '" + key + "' must be strictly positive");
    }
    return v;
}

std::uint64_t ResolvedConfig::get_u64(const std::string& key) const {
    const std::string s = get_string(key);
    std::uint64_t v = 0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        // Accept scientific-looking integers such as 1e5 for convenience.
        try {
            std::size_t pos = 0;
            const double d = std::stod(s, &pos);
            if (pos == s.size() && d >= 0.0 && d <= 1.8e19 && d == std::floor(d)) {
                return static_cast<std::uint64_t>(d);
            }
        } catch (const std::exception&) {
        }
        throw ConfigError("config key '" + key + "': '" + s +
                          "' is not a non-negative integer");
    }
    return v;
}

bool ResolvedConfig::get_bool(const std::string& key) const {
    const std::string s = get_string(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("config key '" + key + "': '" + s + "' is not a boolean");
}

}  // namespace grw
