#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace nopde {

/// Flat key=value configuration: '#' comments, CLI overrides merged on top.
/// Keys outside the known set are a hard error so typos never become silent
/// defaults.
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_str(const std::string& key, const std::string& fallback) const;
    std::string require_str(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Throws ConfigError naming the first key not in `known`.
    void reject_unknown_keys(const std::set<std::string>& known) const;

    /// Sorted key=value echo for run manifests.
    std::string echo() const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

/// Every configuration key any subcommand understands.
const std::set<std::string>& known_config_keys();

} // namespace nopde
