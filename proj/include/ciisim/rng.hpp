#pragma once

#include <cstdint>
#include <random>

namespace ciisim {

/// Every stochastic component receives one of these explicitly; nothing in
/// the library reads ambient randomness.
using Rng = std::mt19937_64;

/// Derives an independent stream seed from a run seed and a stream label so
/// that, e.g., attacker selection does not perturb sensor timing.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

}  // namespace ciisim
