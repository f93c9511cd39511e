#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "embkit/errors.hpp"

namespace embkit::config {

/// Minimal TOML-like config: "[section]" headers, "key = value" lines,
/// "#" comments. Values are strings; typed getters parse on demand.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
    static KeyValueConfig from_file(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    /// Comma-separated list of sizes, e.g. "1,5,10,20".
    std::vector<std::size_t> get_sizes(const std::string& section, const std::string& key,
                                       std::vector<std::size_t> fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    /// Sorted "section.key=value" lines; the digest input.
    std::string canonical() const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

/// 16-hex-digit digest over the canonical config text and the seed; stamped
/// into artifact metadata and checked by `eval`.
std::string config_digest(const KeyValueConfig& cfg, std::uint64_t seed);

} // namespace embkit::config
