#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace rinfo {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent stream seed from a master seed and a path of
/// counters, e.g. derive_seed(master, {trial, k, block}, "ri").
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path,
                          std::string_view purpose = {}) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace rinfo
