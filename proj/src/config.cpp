#include "specstack/config.hpp"

#include "specstack/csv.hpp"
#include "specstack/types.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <sstream>

extern char** environ;

namespace specstack {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        cfg.kv_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    try {
        return parse(read_file(path));
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

const std::string& Config::raw(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
}

double Config::get_double(const std::string& key) const {
    try {
        return parse_double(raw(key), "config key " + key);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
    const double v = get_double(key);
    const auto i = static_cast<std::int64_t>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("config key " + key + ": expected integer, got " + raw(key));
    return i;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = raw(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + ": expected boolean, got " + v);
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::string v = raw(key);
    if (v.size() >= 2 && v.front() == '[' && v.back() == ']')
        v = v.substr(1, v.size() - 2);
    std::vector<std::string> out;
    for (const auto& item : split(v, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::vector<std::string> Config::get_list(const std::string& key,
                                          const std::vector<std::string>& fallback) const {
    return has(key) ? get_list(key) : fallback;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_list(key))
        out.push_back(parse_double(item, "config key " + key));
    return out;
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) const {
    return has(key) ? get_double_list(key) : fallback;
}

std::vector<Interval> Config::get_intervals(const std::string& key,
                                            const std::vector<Interval>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<Interval> out;
    for (const auto& item : get_list(key)) {
        auto parts = split(item, ':');
        if (parts.size() != 2)
            throw ConfigError("config key " + key + ": expected lo:hi, got " + item);
        Interval iv;
        iv.lo = parse_double(parts[0], "config key " + key);
        iv.hi = parse_double(parts[1], "config key " + key);
        if (iv.lo > iv.hi)
            throw ConfigError("config key " + key + ": interval lo > hi in " + item);
        out.push_back(iv);
    }
    return out;
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

void Config::apply_env_overrides() {
    static const std::string prefix = "SPECSTACK_";
    for (char** env = environ; env && *env; ++env) {
        const std::string entry(*env);
        auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string name = entry.substr(0, eq);
        if (name.rfind(prefix, 0) != 0) continue;
        std::string key;
        for (std::size_t i = prefix.size(); i < name.size(); ++i) {
            if (name[i] == '_' && i + 1 < name.size() && name[i + 1] == '_') {
                key.push_back('.');
                ++i;
            } else {
                key.push_back(static_cast<char>(std::tolower(name[i])));
            }
        }
        kv_[key] = entry.substr(eq + 1);
    }
}

std::string Config::canonical_text() const {
    std::ostringstream out;
    for (const auto& [k, v] : kv_) out << k << " = " << v << '\n';
    return out.str();
}

std::string Config::hash() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_text())));
    return buf;
}

}  // namespace specstack
