#pragma once

#include <cstdint>
#include <string_view>

namespace obbgen {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Per-item seed from (run seed, file stem, item index); independent of the
/// order in which items are processed.
inline constexpr std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view stem, std::uint64_t index) {
    return splitmix64(splitmix64(run_seed ^ fnv1a64(stem)) + index);
}

}  // namespace obbgen
