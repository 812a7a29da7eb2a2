#pragma once

// Reproducible random streams.
//
// derive_stream(seed, index) seeds a std::mt19937_64 through std::seed_seq
// with the five 32-bit words
//     { seed mod 2^32, seed >> 32, index mod 2^32, index >> 32, 0x76696272 }
// Both std::seed_seq and mt19937_64 are fully specified by the standard, and
// the normal deviates come from Boost's ziggurat sampler, which is portable,
// so a (seed, index) pair names the same stream on every platform and for
// every worker count.

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace vibra {

class RngStream {
 public:
  using Engine = std::mt19937_64;

  explicit RngStream(Engine engine) : engine_(std::move(engine)) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return boost::random::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  /// Fair coin from the top bit of the next engine word.
  bool coin() { return (engine_() >> 63) != 0; }

  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

inline constexpr std::uint32_t kStreamSalt = 0x76696272u;

RngStream derive_stream(std::uint64_t seed, std::uint64_t index);

}  // namespace vibra
