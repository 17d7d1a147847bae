#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace specstack {

// Closed wavenumber interval; `hi` may be +inf ("everything above lo").
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return x >= lo && x <= hi; }
};

// Flat key/value configuration. Values are scalars or lists:
//
//   seed = 17
//   candidates = [pls, enet, rf]
//   model.pls.ncomp = [2, 4, 8]
//   noise_regions = [1600:1710, 2990:3690, 3822:inf]
//
// '#' starts a comment. Any key can be overridden from the environment
// via SPECSTACK_<KEY> with '.' spelled as '__' (e.g. SPECSTACK_SEED,
// SPECSTACK_SPLITS__N).
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    std::vector<std::string> get_list(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key,
                                      const std::vector<std::string>& fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;
    std::vector<Interval> get_intervals(const std::string& key,
                                        const std::vector<Interval>& fallback) const;

    void set(const std::string& key, const std::string& value);

    // Applies SPECSTACK_* environment overrides on top of the parsed file.
    void apply_env_overrides();

    // Canonical text form (sorted keys); hashed into the run manifest.
    std::string canonical_text() const;
    std::string hash() const;  // FNV-1a 64 of canonical_text, hex

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    const std::string& raw(const std::string& key) const;

    std::map<std::string, std::string> kv_;
};

std::uint64_t fnv1a64(const std::string& s);

}  // namespace specstack
