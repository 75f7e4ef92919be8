#pragma once

#include <boost/random/mersenne_twister.hpp>

#include <cstdint>

namespace sfwm {

using Rng = boost::random::mt19937_64;

/// Stage tags keep the per-trial random streams of different pipeline
/// stages disjoint.
enum class Stage : std::uint64_t {
  kChaoticField1 = 1,
  kChaoticField2 = 2,
  kPairs = 3,
  kDetectField1 = 4,
  kDetectField2 = 5,
  kTest = 99,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t stage) noexcept {
  return mix64(mix64(mix64(master) ^ index) ^ (stage * 0xd1b54a32d192ed03ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, Stage stage) noexcept {
  return derive_seed(master, index, static_cast<std::uint64_t>(stage));
}

}  // namespace sfwm
