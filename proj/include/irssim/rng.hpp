#pragma once
#include <cstdint>
#include <cmath>

namespace irssim {

// Counter-keyed splitmix64 stream. fork(i) derives an independent stream for
// sub-task i of this stream, so per-packet draws do not depend on how many
// threads consumed the parent. All draws are reproducible from the seed alone.
struct RngStream {
    std::uint64_t state = 0x9e3779b97f4a7c15ull;

    explicit RngStream(std::uint64_t seed = 0) { state = mix(0x6a09e667f3bcc909ull ^ seed); }

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return double(next_u64() >> 11) * 0x1p-53; }

    // standard normal via Box-Muller; two u64 consumed per call.
    // u1 is offset into (0,1] so the log never sees zero.
    double gaussian() {
        double u1 = (double(next_u64() >> 11) + 1.0) * 0x1p-53;
        double u2 = double(next_u64() >> 11) * 0x1p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    RngStream fork(std::uint64_t idx) const {
        RngStream r(0);
        r.state = mix(state ^ mix(idx));
        return r;
    }
};

} // namespace irssim
