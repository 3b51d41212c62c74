#ifndef NELSONIUM_CONFIG_HPP
#define NELSONIUM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nelsonium {

// Declarative key = value configuration grouped by [section]. Keys are
// addressed as "section.key". Parsing is permissive about whitespace and
// comments; validation against a per-experiment schema is strict: unknown
// keys and missing required keys are config errors.
class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint32_t get_u32(const std::string& key) const;
    std::uint32_t get_u32(const std::string& key, std::uint32_t fallback) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::uint32_t> get_u32_list(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key) const;

    // Strict schema check: every present key must be allowed, every required
    // key present. Throws config_error naming the offending key.
    void validate(const std::set<std::string>& allowed,
                  const std::set<std::string>& required) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }
    const std::string& raw_text() const { return raw_; }

  private:
    std::map<std::string, std::string> kv_;
    std::string raw_;
    std::string origin_;
};

// FNV-1a 64-bit content hash, hex-encoded; stamps configs into manifests.
std::string fnv1a_hex(const std::string& bytes);

} // namespace nelsonium

#endif
