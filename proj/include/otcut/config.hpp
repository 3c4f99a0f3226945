#pragma once
#include <map>
#include <string>
#include <vector>

namespace otcut {

/// Flat typed key-value configuration: one `key = value` per line, `#`
/// comments, later keys win. CLI flag overrides are applied with set() after
/// loading, so flags beat the file. Every accessor failure throws ConfigError
/// naming the offending key.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    /// parse a config file; ConfigError on unreadable file or malformed line
    static KeyValueConfig from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// comma-separated doubles; ConfigError when empty or malformed
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;

    /// all entries, for the run manifest echo
    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

} // namespace otcut
