#pragma once

#include <array>
#include <cstdint>

namespace occ {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 counter-based generator with 10 rounds.
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

/// Maps two 32-bit words onto the 53-bit grid in [0, 1).
constexpr double unit_double(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) | (lo >> 11);
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// Reserved stream identifiers. Distinct streams never share an address.
namespace streams {
inline constexpr std::uint32_t simulation = 0;
inline constexpr std::uint32_t assumptions = 0x100;  // + hypothesis index
inline constexpr std::uint32_t subsets = 0x200;
inline constexpr std::uint32_t patterns = 0x201;
}  // namespace streams

/**
 * Virtual array of standard uniforms U(replicate, step, site).
 *
 * Each value is a pure function of (seed, stream, replicate, step, site), so any
 * replicate can be regenerated independently of how work is scheduled.
 */
class UniformArray {
 public:
  explicit UniformArray(std::uint64_t seed, std::uint32_t stream = streams::simulation)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        seed_(seed) {}

  double operator()(std::uint32_t replicate, std::uint32_t step, std::uint32_t site) const {
    const auto out = philox4x32({site, step, replicate, stream_}, key_);
    return unit_double(out[0], out[1]);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint32_t stream() const { return stream_; }

 private:
  PhiloxKey key_;
  std::uint32_t stream_;
  std::uint64_t seed_;
};

}  // namespace occ
