#include "torsec/covector.hpp"

#include <charconv>
#include <vector>

#include "torsec/errors.hpp"

namespace torsec {

Covector Covector::parse(const std::string& text) {
    std::string s = text;
    if (!s.empty() && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);

    std::vector<std::int64_t> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = s.find(',', start);
        const std::string piece = s.substr(start, comma == std::string::npos ? comma
                                                                             : comma - start);
        std::size_t lo = piece.find_first_not_of(" \t");
        std::size_t hi = piece.find_last_not_of(" \t");
        if (lo == std::string::npos)
            throw ConfigError("covector '" + text + "': empty component");
        std::int64_t value = 0;
        const char* b = piece.data() + lo;
        const char* e = piece.data() + hi + 1;
        auto [p, ec] = std::from_chars(b, e, value);
        if (ec != std::errc{} || p != e)
            throw ConfigError("covector '" + text + "': component '" +
                              piece.substr(lo, hi - lo + 1) + "' is not an integer");
        parts.push_back(value);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (parts.size() == 2) return Covector::of(parts[0], parts[1]);
    if (parts.size() == 3) return Covector::of(parts[0], parts[1], parts[2]);
    throw ConfigError("covector '" + text + "': expected 2 or 3 components, got " +
                      std::to_string(parts.size()));
}

} // namespace torsec
