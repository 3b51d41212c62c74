#include "nelsonium/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nelsonium/errors.hpp"

namespace nelsonium {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.raw_ = text;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error(origin + ":" + std::to_string(lineno) +
                                   ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw config_error(origin + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error(origin + ":" + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": key '" + key + "' outside any [section]");
        const std::string full = section + "." + key;
        if (cfg.kv_.count(full))
            throw config_error(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                               full + "'");
        cfg.kv_[full] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

std::string Config::get_string(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw config_error(origin_ + ": missing required key '" + key + "'");
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (errno != 0 || end == v.c_str() || *end != '\0')
        throw config_error(origin_ + ": key '" + key + "' is not a number: '" + v + "'");
    return x;
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key) const {
    const std::string v = get_string(key);
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (errno != 0 || end == v.c_str() || *end != '\0' || v.front() == '-')
        throw config_error(origin_ + ": key '" + key + "' is not a nonnegative integer: '" + v +
                           "'");
    return static_cast<std::uint64_t>(x);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
}

std::uint32_t Config::get_u32(const std::string& key) const {
    const std::uint64_t x = get_u64(key);
    if (x > 0xFFFFFFFFull)
        throw config_error(origin_ + ": key '" + key + "' exceeds 32-bit range");
    return static_cast<std::uint32_t>(x);
}

std::uint32_t Config::get_u32(const std::string& key, std::uint32_t fallback) const {
    return has(key) ? get_u32(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error(origin_ + ": key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<std::uint32_t> Config::get_u32_list(const std::string& key) const {
    const std::string v = get_string(key);
    std::vector<std::uint32_t> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        errno = 0;
        char* end = nullptr;
        const unsigned long long x = std::strtoull(item.c_str(), &end, 10);
        if (errno != 0 || end == item.c_str() || *end != '\0')
            throw config_error(origin_ + ": key '" + key + "' has a non-integer entry: '" + item +
                               "'");
        out.push_back(static_cast<std::uint32_t>(x));
    }
    if (out.empty()) throw config_error(origin_ + ": key '" + key + "' is an empty list");
    return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    const std::string v = get_string(key);
    std::vector<double> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        errno = 0;
        char* end = nullptr;
        const double x = std::strtod(item.c_str(), &end);
        if (errno != 0 || end == item.c_str() || *end != '\0')
            throw config_error(origin_ + ": key '" + key + "' has a non-numeric entry: '" + item +
                               "'");
        out.push_back(x);
    }
    if (out.empty()) throw config_error(origin_ + ": key '" + key + "' is an empty list");
    return out;
}

void Config::validate(const std::set<std::string>& allowed,
                      const std::set<std::string>& required) const {
    for (const auto& [key, value] : kv_)
        if (!allowed.count(key) && !required.count(key))
            throw config_error(origin_ + ": unknown key '" + key +
                               "' for this experiment (schema rejection)");
    for (const std::string& key : required)
        if (!kv_.count(key))
            throw config_error(origin_ + ": missing required key '" + key + "'");
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

} // namespace nelsonium
