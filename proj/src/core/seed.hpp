#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>

namespace recoverbench {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stable seed derivation: the result depends only on the parts, in order.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = mix64(base);
    for (auto p : parts) h = mix64(h ^ mix64(p));
    return h;
}

inline std::uint64_t bits_of(double v) noexcept { return std::bit_cast<std::uint64_t>(v); }

// Tags separating the random streams that hang off one cell seed.
enum class Stream : std::uint64_t {
    channel_order = 1,
    folds = 2,
    univariate_perm = 3,
    model_perm = 4,
};

inline std::uint64_t stream_seed(std::uint64_t cell_seed, Stream s) noexcept {
    return derive_seed(cell_seed, {static_cast<std::uint64_t>(s)});
}

} // namespace recoverbench
