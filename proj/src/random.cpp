#include "nsp/random.hpp"

#include <limits>

namespace nsp {

Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  const auto tag = static_cast<std::uint64_t>(stream);
  std::seed_seq seq{lo(seed), hi(seed), lo(tag), hi(tag), lo(index), hi(index)};
  return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  auto rng = make_rng(seed, Stream::trials, index);
  return rng();
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  // Largest multiple of n representable; draws above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % n);
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return draw % n;
}

double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace nsp
