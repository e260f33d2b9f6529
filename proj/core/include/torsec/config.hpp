#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace torsec {

/// One value of the config language: a deliberately small TOML subset —
/// [table] and [table.sub] headers, `key = value` lines, values limited to
/// strings, integers, reals, booleans, and (possibly nested) arrays.
/// Comments start with '#'. No inline tables, no multi-line values.
struct ConfigValue {
    enum class Kind { string, integer, real, boolean, array };
    Kind kind = Kind::string;
    std::string str;
    std::int64_t integer = 0;
    double real = 0.0;
    bool boolean = false;
    std::vector<ConfigValue> items;

    double as_real() const; // accepts integer-valued entries too
};

/// Flattened document: fully qualified keys "table.sub.key" -> value.
using ConfigTable = std::map<std::string, ConfigValue>;

/// Parses the config language; ConfigError with a line number on bad input.
ConfigTable parse_config(std::istream& in);
ConfigTable parse_config_file(const std::string& path);

} // namespace torsec
