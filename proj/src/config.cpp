#include "nopde/config.hpp"

#include <cstdlib>
#include <sstream>

#include "nopde/errors.hpp"
#include "nopde/serialize.hpp"

namespace nopde {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace

Config Config::from_file(const std::string& path) { return from_string(read_file(path)); }

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        cfg.kv_[key] = value;
    }
    return cfg;
}

std::string Config::get_str(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

std::string Config::require_str(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing required config key: " + key);
    return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0') {
        throw ConfigError("config key " + key + ": not a number: " + it->second);
    }
    return v;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    char* end = nullptr;
    const long long v = std::strtoll(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0') {
        throw ConfigError("config key " + key + ": not an integer: " + it->second);
    }
    return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0') {
        throw ConfigError("config key " + key + ": not an unsigned integer: " + it->second);
    }
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config key " + key + ": not a boolean: " + it->second);
}

void Config::reject_unknown_keys(const std::set<std::string>& known) const {
    for (const auto& [key, value] : kv_) {
        if (known.count(key) == 0) throw ConfigError("unknown config key: " + key);
    }
}

std::string Config::echo() const {
    std::ostringstream out;
    for (const auto& [key, value] : kv_) out << key << '=' << value << '\n';
    return out.str();
}

const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        // problem selection
        "problem", "n", "s", "D_A", "D_S", "mu", "rho",
        // newton solver
        "tol", "max_iter", "divergence_cap", "damping", "dedup_tol", "guesses",
        // data generation
        "recipe", "count", "depth", "K", "L", "modes", "delta", "decay", "stride", "split",
        "base", "base_index",
        // architecture
        "width", "net_depth", "trunk_depth", "p", "trunk", "bias0", "pod_snapshots",
        // training
        "mode", "lambda", "lr", "weight_decay", "batch_size", "epochs", "eval_every",
        "combined_halve", "seed",
        // surrogate / bench
        "steps", "hybrid_tail", "counts", "reps",
        // execution
        "threads",
    };
    return keys;
}

} // namespace nopde
