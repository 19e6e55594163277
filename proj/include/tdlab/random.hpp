#pragma once

#include <cstdint>
#include <cstring>
#include <random>
#include <string_view>

namespace tdlab {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t seed_part(std::uint64_t v) { return v; }
inline std::uint64_t seed_part(std::int64_t v) { return static_cast<std::uint64_t>(v); }
inline std::uint64_t seed_part(int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v)); }
inline std::uint64_t seed_part(unsigned v) { return v; }
inline std::uint64_t seed_part(std::string_view s) { return fnv1a(s); }
inline std::uint64_t seed_part(const char* s) { return fnv1a(s); }
inline std::uint64_t seed_part(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    return bits;
}

} // namespace detail

/// Mixes a base seed with any number of labels (integers, strings, doubles)
/// into an independent 64-bit stream seed. Pure function of its arguments.
template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t base, const Parts&... parts) {
    std::uint64_t h = detail::splitmix64(base);
    ((h = detail::splitmix64(h ^ detail::seed_part(parts))), ...);
    return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// FNV-1a of arbitrary text, used for config hashes.
inline std::uint64_t text_hash(std::string_view s) { return detail::fnv1a(s); }

} // namespace tdlab
