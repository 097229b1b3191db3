#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sage {

inline constexpr std::uint64_t kFnvBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x00000100000001b3ULL;

// FNV-1a, 64-bit. Stable across platforms; used for feature hashing and
// config digests.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvBasis) {
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t fnv1a64_u64le(std::uint64_t value, std::uint64_t h = kFnvBasis) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xffULL;
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and up to two indices
// (e.g. iteration and trajectory). Same inputs always give the same stream.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ splitmix64(a + 0x100000001b3ULL));
    h = splitmix64(h ^ splitmix64(b + 0xcbf29ce484222325ULL));
    return h;
}

std::string hex64(std::uint64_t value);

}  // namespace sage
