#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace grw {

/// Invalid configuration input; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

using KeyValues = std::map<std::string, std::string>;

/// Parse a flat `key = value` file: one pair per line, `#` comments, blank
/// lines ignored. Duplicate keys are an error.
KeyValues parse_key_value_text(const std::string& text, const std::string& origin);

/// Load configuration from a path. Plain key-value files are parsed as such;
/// a JSON report produced by this tool is recognized (leading '{') and its
/// embedded "config" object is used, so any emitted report re-runs as-is.
KeyValues load_config_source(const std::string& path);

/// Defaults overridden by file values overridden by CLI values, with every
/// key checked against the allowed set.
class ResolvedConfig {
public:
    ResolvedConfig(KeyValues defaults, const KeyValues& file_values,
                   const KeyValues& cli_values);

    const KeyValues& values() const { return values_; }

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    double get_positive(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;

private:
    KeyValues values_;
};

}  // namespace grw
