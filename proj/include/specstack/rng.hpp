#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

namespace specstack {

// splitmix64 finalizer; used to derive child seeds from (seed, path...).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Hierarchical seed derivation. Every parallel unit of work draws its own
// stream from (master_seed, unit path), so results do not depend on
// scheduling or worker count.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc908ULL);
    for (std::uint64_t part : path) h = mix64(h ^ mix64(part));
    return h;
}

// xoshiro256** with fully specified sampling helpers. The standard
// distributions are implementation-defined, so all sampling goes through
// this class to keep streams stable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            s = mix64(s);
            w = s;
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound); bound >= 1. Rejection-free 128-bit
    // multiply (Lemire) with a debias loop.
    std::uint64_t next_below(std::uint64_t bound) {
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t t = (0 - bound) % bound;
            while (lo < t) {
                m = static_cast<__uint128_t>(next_u64()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    int next_int(int bound) { return static_cast<int>(next_below(static_cast<std::uint64_t>(bound))); }

    bool next_bool(double p) { return next_double() < p; }

    // Marsaglia polar method.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = next_below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct values from [0, n), in draw order (partial Fisher-Yates).
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        std::vector<int> out;
        out.reserve(k);
        for (int i = 0; i < k; ++i) {
            std::size_t j = i + next_below(static_cast<std::uint64_t>(n - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace specstack
