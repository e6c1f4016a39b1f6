#pragma once

#include <cstdint>
#include <limits>

namespace hrelay {

std::uint64_t splitmix64(std::uint64_t& state);

// Mixes a seed with stream coordinates into an independent 64-bit key.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// xoshiro256++ seeded through splitmix64. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key);
  static Rng for_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    return Rng(stream_key(seed, a, b, c));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  // Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

 private:
  std::uint64_t s_[4];
};

}  // namespace hrelay
