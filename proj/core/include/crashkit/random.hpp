#pragma once

#include <cstdint>
#include <random>

namespace crashkit {

/// Independent random stream for job `stream` under a run seed. Every
/// stochastic step keys its randomness on (seed, job index) so results do not
/// depend on execution order.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over both words
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return std::mt19937_64(mix(mix(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1)));
}

}  // namespace crashkit
