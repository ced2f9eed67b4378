#pragma once

#include <cstdint>
#include <random>

namespace nsp {

using Rng = std::mt19937_64;

/// Named sub-streams derived from a run seed.
enum class Stream : std::uint64_t {
  training_data = 1,
  test_data = 2,
  initialization = 3,
  updates = 4,
  verification = 5,
  trials = 6,
};

/// Engine seeded from (seed, stream, index) through std::seed_seq.
/// Both mt19937_64 and seed_seq are fully specified, so streams are
/// reproducible across standard libraries.
Rng make_rng(std::uint64_t seed, Stream stream = Stream::updates, std::uint64_t index = 0);

/// Seed of trial `index` within a run seeded by `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Uniform integer in [0, n). Rejection sampling; independent of the
/// standard library's distribution implementations.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

/// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(Rng& rng);

}  // namespace nsp
