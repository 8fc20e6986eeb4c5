#pragma once

// Flat "key = value" configuration text. '#' starts a comment; blank lines
// are ignored; every key may appear once.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "occlukg/error.hpp"

namespace occlukg {

struct ConfigEntry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

namespace detail {
inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}
}  // namespace detail

inline std::vector<ConfigEntry> parse_config_text(std::string_view text) {
    std::vector<ConfigEntry> out;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        ConfigEntry e{std::string(detail::trim(line.substr(0, eq))), std::string(detail::trim(line.substr(eq + 1))),
                      line_no};
        if (e.key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(e.key).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + e.key + "'");
        }
        out.push_back(std::move(e));
    }
    return out;
}

inline ConfigError config_error(const ConfigEntry& e, const std::string& what) {
    return ConfigError("line " + std::to_string(e.line) + ": " + e.key + ": " + what);
}

inline ConfigError unknown_key(const ConfigEntry& e) {
    return ConfigError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
}

inline double parse_real(const ConfigEntry& e, std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw config_error(e, "expected a real number, got '" + std::string(text) + "'");
    }
    return v;
}

inline double parse_real(const ConfigEntry& e) { return parse_real(e, e.value); }

inline std::uint64_t parse_unsigned(const ConfigEntry& e, std::string_view text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw config_error(e, "expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return v;
}

inline std::uint64_t parse_unsigned(const ConfigEntry& e) { return parse_unsigned(e, e.value); }

inline bool parse_bool(const ConfigEntry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw config_error(e, "expected true or false");
}

// Whitespace- or comma-separated reals.
inline std::vector<double> parse_real_list(const ConfigEntry& e) {
    std::vector<double> out;
    std::string normalized = e.value;
    for (char& c : normalized)
        if (c == ',') c = ' ';
    std::istringstream in(normalized);
    std::string token;
    while (in >> token) out.push_back(parse_real(e, token));
    return out;
}

inline std::vector<std::string> parse_word_list(const ConfigEntry& e) {
    std::vector<std::string> out;
    std::string normalized = e.value;
    for (char& c : normalized)
        if (c == ',') c = ' ';
    std::istringstream in(normalized);
    std::string token;
    while (in >> token) out.push_back(token);
    return out;
}

// Renders a double so that parse_real reads back the same value.
inline std::string format_config_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace occlukg
