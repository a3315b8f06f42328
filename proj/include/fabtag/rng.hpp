#pragma once

#include <cmath>
#include <cstdint>

namespace fabtag {

// splitmix64: tiny, portable, and good enough for payload sampling and
// measurement noise. Counter-based use (hash of seed+indices) keeps the
// simulators deterministic under internal parallelism.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // uniform in [0, n) without modulo bias; n > 0
    uint64_t below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    uint64_t state_;
};

// One standard normal draw keyed on (seed, a, b); same key -> same value.
inline double counter_gauss(uint64_t seed, uint64_t a, uint64_t b) {
    uint64_t h = splitmix64(seed ^ splitmix64(a ^ 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ splitmix64(b ^ 0x9e3779b97f4a7c15ULL));
    uint64_t h2 = splitmix64(h);
    double u1 = static_cast<double>(h >> 11) * 0x1.0p-53;
    double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// FNV-1a, used to fingerprint resolved configs in reports.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace fabtag
