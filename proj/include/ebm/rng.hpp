#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ebm {

// splitmix64 finalizer: a bijection on 64-bit words with good avalanche.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Per-path engine seed. master is mixed once, the path index is folded in with
// an odd multiplier (injective mod 2^64) and the sum passes through the
// splitmix64 bijection twice: distinct indices can never collide for a fixed
// master seed, and nearby indices land far apart.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t path_index) {
    std::uint64_t z = splitmix64_mix(master) + path_index * 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(splitmix64_mix(z));
}

// Reproducible generator: mt19937_64 (fully specified by the standard) plus a
// Marsaglia-polar normal with cached spare. std::normal_distribution is
// implementation-defined, so draws are produced here instead.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform on [0,1) with 53 random bits
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform on (0,1], safe as a log argument
    double uniform01_open() { return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53; }

    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double exponential() { return -std::log(uniform01_open()); }

  private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline Rng derive_stream(std::uint64_t master, std::uint64_t path_index) {
    return Rng(stream_seed(master, path_index));
}

}
