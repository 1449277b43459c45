#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace srasym {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++; sampling is done from explicit uniforms so results are
/// identical across platforms and standard-library versions.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one draw per call, no caching).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_{};
};

/// One independent stream per trial index, derived from a root seed. Results
/// then do not depend on how trials are partitioned across workers.
inline Xoshiro256 trial_rng(std::uint64_t root_seed, std::uint64_t trial) {
    std::uint64_t mix = root_seed;
    splitmix64(mix);
    mix ^= 0x5851f42d4c957f2dULL * (trial + 1);
    return Xoshiro256(mix);
}

/// Inverse-cdf sampler for a fixed finite distribution.
class DiscreteSampler {
public:
    explicit DiscreteSampler(const std::vector<double>& probs) : cum_(probs) {
        double acc = 0;
        for (double& c : cum_) {
            acc += c;
            c = acc;
        }
        cum_.back() = 1.0;
    }

    std::size_t operator()(Xoshiro256& rng) const {
        double u = rng.uniform();
        std::size_t lo = 0, hi = cum_.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (u < cum_[mid])
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

private:
    std::vector<double> cum_;
};

}  // namespace srasym
