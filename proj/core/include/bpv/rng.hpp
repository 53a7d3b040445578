#pragma once

#include <cstdint>
#include <random>

namespace bpv {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates structured inputs such as (seed, doc_id).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Fixed tags for expanding one global seed into independent per-stage,
// per-document streams.
enum class SeedTag : std::uint64_t {
  kInit = 1,
  kShuffle = 2,
  kNegatives = 3,
  kVi = 4,
  kMap = 5,
  kClassifier = 6,
};

inline std::uint64_t derive_seed(std::uint64_t global_seed, SeedTag tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(global_seed ^ static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return h;
}

inline Rng make_rng(std::uint64_t global_seed, SeedTag tag, std::uint64_t a = 0,
                    std::uint64_t b = 0) {
  return Rng(derive_seed(global_seed, tag, a, b));
}

}  // namespace bpv
