#pragma once

// Counter-based generator: draw #p from seed s is a pure integer function of
// (s, p), so identical seeds replay bitwise-identically on any platform.
// Algorithm identifier "splitmix64-v1" is recorded in solver reports.

#include <cstdint>
#include <utility>

namespace inclusionkit {

inline constexpr const char* kRngAlgorithm = "splitmix64-v1";

struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t position = 0;

    friend bool operator==(const RngState&, const RngState&) = default;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}
}  // namespace detail

inline std::pair<std::uint64_t, RngState> next_u64(RngState s) {
    const std::uint64_t raw =
        detail::splitmix64(s.seed + (s.position + 1) * 0x9E3779B97F4A7C15ULL);
    s.position += 1;
    return {raw, s};
}

/// Uniform draw in [0, 1) with 53 random bits.
inline std::pair<double, RngState> next_unit(RngState s) {
    auto [raw, s2] = next_u64(s);
    return {static_cast<double>(raw >> 11) * 0x1.0p-53, s2};
}

inline std::pair<double, RngState> next_uniform(RngState s, double lo, double hi) {
    auto [u, s2] = next_unit(s);
    return {lo + (hi - lo) * u, s2};
}

}  // namespace inclusionkit
