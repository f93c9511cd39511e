#include "embkit/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "embkit/rng.hpp"

namespace embkit::config {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(origin + " line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError(origin + " line " + std::to_string(lineno) + ": empty section");
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + " line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        std::string key = trim(std::string_view(t).substr(0, eq));
        std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + " line " + std::to_string(lineno) + ": empty key");
        if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                                  (value.front() == '\'' && value.back() == '\'')))
            value = value.substr(1, value.size() - 2);
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string text(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
    return parse(text, path);
}

bool KeyValueConfig::has(const std::string& section, const std::string& key) const {
    auto sit = sections_.find(section);
    return sit != sections_.end() && sit->second.count(key) > 0;
}

std::string KeyValueConfig::get(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
    auto sit = sections_.find(section);
    if (sit == sections_.end()) return fallback;
    auto kit = sit->second.find(key);
    return kit == sit->second.end() ? fallback : kit->second;
}

double KeyValueConfig::get_double(const std::string& section, const std::string& key,
                                  double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config [" + section + "] " + key + ": not a number: '" + v + "'");
    }
}

int KeyValueConfig::get_int(const std::string& section, const std::string& key,
                            int fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("config [" + section + "] " + key + ": not an integer: '" + v + "'");
    return out;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& section, const std::string& key,
                                      std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("config [" + section + "] " + key + ": not an unsigned integer: '" + v +
                          "'");
    return out;
}

bool KeyValueConfig::get_bool(const std::string& section, const std::string& key,
                              bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get(section, key, "");
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config [" + section + "] " + key + ": not a boolean: '" + v + "'");
}

std::vector<std::size_t> KeyValueConfig::get_sizes(const std::string& section,
                                                   const std::string& key,
                                                   std::vector<std::size_t> fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        std::size_t comma = v.find(',', start);
        std::string item = trim(std::string_view(v).substr(
            start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) {
            std::size_t x = 0;
            auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
            if (ec != std::errc{} || p != item.data() + item.size())
                throw ConfigError("config [" + section + "] " + key + ": bad list item '" + item +
                                  "'");
            out.push_back(x);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty())
        throw ConfigError("config [" + section + "] " + key + ": empty list");
    return out;
}

void KeyValueConfig::set(const std::string& section, const std::string& key,
                         const std::string& value) {
    sections_[section][key] = value;
}

std::string KeyValueConfig::canonical() const {
    std::string out;
    for (const auto& [section, kv] : sections_) {
        for (const auto& [key, value] : kv) {
            out += section;
            out += '.';
            out += key;
            out += '=';
            out += value;
            out += '\n';
        }
    }
    return out;
}

std::string config_digest(const KeyValueConfig& cfg, std::uint64_t seed) {
    std::string text = cfg.canonical() + "|seed=" + std::to_string(seed);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(text)));
    return std::string(buf);
}

} // namespace embkit::config
