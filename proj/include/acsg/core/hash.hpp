#pragma once

#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>

namespace acsg {

inline constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
    return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t hash_values(std::initializer_list<std::uint64_t> vs) {
    std::uint64_t h = 0x51ed270b27a1f0c3ULL;
    for (auto v : vs) h = hash_combine(h, v);
    return h;
}

inline std::string to_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Engine used for every seeded draw in the project. mt19937_64 output is fully specified
// by the standard, so runs are reproducible across platforms.
using Rng = std::mt19937_64;

// std::uniform_real_distribution and friends are implementation-defined; these helpers are not.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

inline int uniform_int(Rng& rng, int lo, int hi_inclusive) {
    return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
}

double standard_normal(Rng& rng);

}  // namespace acsg
