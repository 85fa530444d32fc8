#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mphd {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a over raw bytes. Used for rng labels and artifact hashes.
std::uint64_t fnv1a64(std::string_view bytes);

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based stream derivation: every random consumer gets its own engine keyed by
/// (seed, purpose label, index), so no component shares or mutates global rng state.
///
///   key = splitmix64(splitmix64(seed) ^ splitmix64(fnv1a64(label)) ^ splitmix64(index + 0x9E3779B97F4A7C15))
///
/// and the engine is std::mt19937_64 seeded with `key`.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

Rng derive_rng(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

}  // namespace mphd
