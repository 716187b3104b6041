#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace heatlab {

/// Philox4x32-10 counter-based generator. Outputs depend only on
/// (counter, key), so per-path substreams can be drawn in any order and
/// parallel generation stays deterministic.
namespace philox {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

inline double to_unit(std::uint32_t v) {
    // (0,1), never exactly 0 or 1
    return (static_cast<double>(v) + 0.5) * (1.0 / 4294967296.0);
}

}  // namespace philox

/// Two standard normals per (seed, path, step, block) via Box-Muller.
inline std::array<double, 2> counter_normals(std::uint64_t seed, std::uint64_t path,
                                             std::uint32_t step, std::uint32_t blk) {
    const std::array<std::uint32_t, 4> ctr{step, blk, static_cast<std::uint32_t>(path),
                                           static_cast<std::uint32_t>(path >> 32)};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed),
                                           static_cast<std::uint32_t>(seed >> 32)};
    const auto out = philox::block(ctr, key);
    const double u1 = philox::to_unit(out[0]);
    const double u2 = philox::to_unit(out[1]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace heatlab
