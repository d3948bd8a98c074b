#pragma once

#include <cstdint>
#include <initializer_list>

namespace sgpl {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Folds a sequence of words into one seed: h <- mix64(h ^ word), starting
// from mix64(master). Each component changes the stream independently, so
// replicate r of scenario s never depends on how many replicates exist.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t p : parts) h = mix64(h ^ p);
  return h;
}

}  // namespace sgpl
