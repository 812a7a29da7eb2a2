#include "vibra/rng.hpp"

namespace vibra {

RngStream derive_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index & 0xffffffffu), static_cast<std::uint32_t>(index >> 32),
                    kStreamSalt};
  return RngStream(RngStream::Engine(seq));
}

}  // namespace vibra
