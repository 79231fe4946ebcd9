#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sicra {

using Rng = std::mt19937_64;

// Every random stream in a run is derived from the single user seed:
//
//   stream_seed = splitmix64(seed ^ fnv1a64(name) ^ splitmix64(index))
//
// `name` identifies the consumer ("arrivals", "access", "srp", ...) and
// `index` separates replicas (episodes, sweep points). The derivation only
// depends on these two functions, so streams stay stable across releases.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name,
                          std::uint64_t index = 0) noexcept;

Rng make_stream(std::uint64_t seed, std::string_view name,
                std::uint64_t index = 0);

}  // namespace sicra
