#pragma once

#include <cstdint>
#include <string_view>

namespace ems {

// SplitMix64 finalizer; used for counter-based draws that must not depend on
// evaluation order.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t counter_draw(std::uint64_t seed, std::uint64_t counter) {
    return mix64(mix64(seed) ^ counter);
}

// Stable seed for a named stream (model family, matrix cell, ...) under a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : stream) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix64(master ^ mix64(h));
}

// Uniform double in [0, 1) from a 64-bit draw.
constexpr double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace ems
