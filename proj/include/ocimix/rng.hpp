#pragma once

#include <cstdint>
#include <random>

namespace ocimix {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed-splitting scheme: every random component of a run draws from its own
// stream derived from the single root seed, so one component can be perturbed
// without disturbing the draw sequence of any other.
enum class SeedTag : std::uint64_t {
  data = 1,       // synthetic dataset generation
  split = 2,      // class-to-task partition
  stream = 3,     // within-task batch shuffling (per task)
  init = 4,       // model parameter init
  buffer = 5,     // reservoir replacement draws
  retrieve = 6,   // memory retrieval draws
  augment = 7,    // pipeline randomness
  mix = 8,        // mixing ratios and pair selection
  analysis = 9,   // Monte-Carlo realizations (per realization)
  indicator = 10, // per-task augmentation-strength indicator
};

inline std::uint64_t derive_seed(std::uint64_t root, SeedTag tag) {
  return splitmix64(root ^ splitmix64(static_cast<std::uint64_t>(tag)));
}

// Indexed substream, e.g. one per task or per Monte-Carlo realization.
inline std::uint64_t derive_seed(std::uint64_t root, SeedTag tag, std::uint64_t index) {
  return splitmix64(derive_seed(root, tag) ^ splitmix64(index + 0x51ULL));
}

inline std::mt19937_64 make_rng(std::uint64_t root, SeedTag tag) {
  return std::mt19937_64(derive_seed(root, tag));
}

inline std::mt19937_64 make_rng(std::uint64_t root, SeedTag tag, std::uint64_t index) {
  return std::mt19937_64(derive_seed(root, tag, index));
}

}  // namespace ocimix
