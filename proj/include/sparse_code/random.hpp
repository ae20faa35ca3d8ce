#pragma once

#include <cstdint>
#include <random>

namespace sparse_code {

/// The 64-bit generator used everywhere. Draws go through the helpers below
/// so that streams are identical across standard library implementations.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream for (master_seed, index); used per trial and per worker.
Rng derive_rng(std::uint64_t master_seed, std::uint64_t index);

/// Uniform integer in [0, bound). bound must be positive.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

/// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(Rng& rng);

}  // namespace sparse_code
