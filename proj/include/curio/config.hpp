#pragma once

// Flat key-value configuration files:
//
//   # comment
//   world.grid_w = 50
//   memory.p_em = 0.1
//
// Keys are namespaced by component. Unknown keys are rejected so typos do not
// silently fall back to defaults.

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "curio/agent.hpp"

namespace curio::config {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class KeyValues {
public:
    static KeyValues parse(const std::string& text);
    static KeyValues load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& raw(const std::string& key) const;
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    void erase(const std::string& key) { values_.erase(key); }

    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<long long> get_ints(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }
    std::string to_text() const;

private:
    std::map<std::string, std::string> values_;
};

/// Overrides fields of `cfg` from `kv`. Keys outside the run namespaces
/// (world., encoder., loop., goals., memory., models.) are ignored only when
/// listed in `passthrough_prefixes`; anything else unknown throws.
void apply(agent::RunConfig& cfg, const KeyValues& kv, const std::vector<std::string>& passthrough_prefixes = {});

/// Snapshot of every run setting, readable by apply().
KeyValues to_key_values(const agent::RunConfig& cfg);

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace curio::config
