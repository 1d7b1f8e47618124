// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace sreid {

/// splitmix64 step; used both as a generator stage and to mix stream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
    std::uint64_t s = seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    return splitmix64(s);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = seed;
    for (char c : tag) h = hash_combine(h, static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return h;
}

/// Deterministic generator with portable output: identical sequences on every
/// platform and compiler, unlike the unspecified std::*_distribution mappings.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed == 0 ? 0x853c49e6748fea9bULL : seed) {
        // warm up past low-entropy seeds
        splitmix64(state_);
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// 32-bit-safe integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    /// Standard normal via Box-Muller (pair-cached).
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double gauss(double mean, double sigma) { return mean + sigma * gauss(); }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sreid
