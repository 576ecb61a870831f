#pragma once

#include <cstdint>
#include <string_view>

namespace lppl {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * @brief Stable sub-seed for one stochastic stage.
 *
 * Depends only on (global seed, stage name, keys), never on scheduling order, so
 * parallel runs reproduce sequential ones bit for bit.
 */
constexpr std::uint64_t derive_seed(std::uint64_t global, std::string_view stage, std::uint64_t key1 = 0,
                                    std::uint64_t key2 = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a offset basis
    for (char c : stage) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t s = mix64(global ^ h);
    s = mix64(s ^ key1);
    return mix64(s ^ (key2 * 0x9e3779b97f4a7c15ULL));
}

}  // namespace lppl
