#pragma once

#include <cstdint>
#include <random>

#include "optlab/types.hpp"

namespace optlab {

// Named random substreams. Every consumer derives its generator from
// (master seed, stream, index), so adding workers or reordering schemes
// never changes what any single drop observes.
enum class Stream : std::uint64_t {
  Placement = 1,
  Shadowing = 2,
  PilotNoise = 3,
  Symbols = 4,
  Exploration = 5,
  Calibration = 6,
  Mdp = 7,
};

// SplitMix64 finalizer; decorrelates consecutive seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t index);

double gaussian(std::mt19937_64& rng);                  // N(0, 1)
cplx circular_gaussian(std::mt19937_64& rng);           // CN(0, 1)
CVec circular_gaussian_vec(std::mt19937_64& rng, int n);

}  // namespace optlab
