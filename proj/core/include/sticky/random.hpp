#ifndef STICKY_RANDOM_HPP_
#define STICKY_RANDOM_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace sticky {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011). Stateless: the
/// output is a pure function of (counter, key), so every (replica, particle,
/// step) triple owns an independent stream position.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  static Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Standard normal variate for (seed, replica, particle, step) by Box-Muller on
/// one Philox block.
inline double philox_normal(std::uint64_t seed, std::uint32_t replica, std::uint32_t particle,
                            std::uint64_t step) {
  const auto out = Philox4x32::block(
      {particle, replica, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)},
      Philox4x32::key_from_seed(seed));
  const std::uint64_t a = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;          // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace sticky

#endif  // STICKY_RANDOM_HPP_
