#include "torsec/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "torsec/errors.hpp"

namespace torsec {

double ConfigValue::as_real() const {
    if (kind == Kind::real) return real;
    if (kind == Kind::integer) return static_cast<double>(integer);
    throw ConfigError("expected a numeric config value");
}

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
    std::ostringstream os;
    os << "config parse error on line " << line << ": " << what;
    throw ConfigError(os.str());
}

void skip_ws(const std::string& s, std::size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
            return false;
    return true;
}

// Parses one value starting at s[i]; advances i past it.
ConfigValue parse_value(const std::string& s, std::size_t& i, int line, int depth) {
    if (depth > 8) fail(line, "arrays nested too deeply");
    skip_ws(s, i);
    if (i >= s.size()) fail(line, "missing value");
    ConfigValue v;
    char c = s[i];
    if (c == '"') {
        v.kind = ConfigValue::Kind::string;
        ++i;
        while (i < s.size() && s[i] != '"') {
            if (s[i] == '\\') {
                ++i;
                if (i >= s.size()) fail(line, "dangling escape in string");
                switch (s[i]) {
                    case 'n': v.str += '\n'; break;
                    case 't': v.str += '\t'; break;
                    case '"': v.str += '"'; break;
                    case '\\': v.str += '\\'; break;
                    default: fail(line, "unsupported escape in string");
                }
            } else {
                v.str += s[i];
            }
            ++i;
        }
        if (i >= s.size()) fail(line, "unterminated string");
        ++i;
        return v;
    }
    if (c == '[') {
        v.kind = ConfigValue::Kind::array;
        ++i;
        skip_ws(s, i);
        if (i < s.size() && s[i] == ']') {
            ++i;
            return v;
        }
        while (true) {
            v.items.push_back(parse_value(s, i, line, depth + 1));
            skip_ws(s, i);
            if (i >= s.size()) fail(line, "unterminated array");
            if (s[i] == ',') {
                ++i;
                continue;
            }
            if (s[i] == ']') {
                ++i;
                return v;
            }
            fail(line, "expected ',' or ']' in array");
        }
    }
    // bare token: boolean, integer, or real
    std::size_t start = i;
    while (i < s.size() && s[i] != ',' && s[i] != ']' && s[i] != '#' && s[i] != ' ' &&
           s[i] != '\t')
        ++i;
    std::string tok = s.substr(start, i - start);
    if (tok == "true" || tok == "false") {
        v.kind = ConfigValue::Kind::boolean;
        v.boolean = tok == "true";
        return v;
    }
    if (tok.empty()) fail(line, "missing value");
    bool looks_real = tok.find_first_of(".eE") != std::string::npos &&
                      tok.find_first_not_of("+-0123456789.eE") == std::string::npos;
    try {
        std::size_t used = 0;
        if (looks_real) {
            v.kind = ConfigValue::Kind::real;
            v.real = std::stod(tok, &used);
        } else {
            v.kind = ConfigValue::Kind::integer;
            v.integer = std::stoll(tok, &used);
        }
        if (used != tok.size()) fail(line, "malformed number '" + tok + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(line, "malformed value '" + tok + "'");
    }
    return v;
}

} // namespace

ConfigTable parse_config(std::istream& in) {
    ConfigTable table;
    std::string prefix;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::size_t i = 0;
        skip_ws(raw, i);
        if (i >= raw.size() || raw[i] == '#') continue;
        if (raw[i] == '[') {
            std::size_t close = raw.find(']', i);
            if (close == std::string::npos) fail(line, "unterminated table header");
            std::string name = raw.substr(i + 1, close - i - 1);
            if (!valid_key(name)) fail(line, "invalid table name '" + name + "'");
            std::size_t rest = close + 1;
            skip_ws(raw, rest);
            if (rest < raw.size() && raw[rest] != '#') fail(line, "trailing text after header");
            prefix = name + ".";
            continue;
        }
        std::size_t eq = raw.find('=', i);
        if (eq == std::string::npos) fail(line, "expected 'key = value'");
        std::string key = raw.substr(i, eq - i);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        if (!valid_key(key)) fail(line, "invalid key '" + key + "'");
        std::size_t vi = eq + 1;
        ConfigValue v = parse_value(raw, vi, line, 0);
        skip_ws(raw, vi);
        if (vi < raw.size() && raw[vi] != '#') fail(line, "trailing text after value");
        std::string full = prefix + key;
        if (table.count(full)) fail(line, "duplicate key '" + full + "'");
        table.emplace(std::move(full), std::move(v));
    }
    return table;
}

ConfigTable parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

} // namespace torsec
