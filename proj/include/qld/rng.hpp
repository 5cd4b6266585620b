#pragma once

#include <array>
#include <cstdint>

namespace qld {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
// pure function of (counter, key), so any frame/pixel draw can be reproduced
// without replaying earlier ones.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

  static Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

// Two independent uniforms in [0, 1) drawn for (seed, frame, pixel, stream).
struct UniformPair {
  double u0;
  double u1;
};

inline UniformPair counter_uniforms(std::uint64_t seed, std::uint64_t frame, std::uint64_t pixel,
                                    std::uint32_t stream = 0) {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(pixel),
                                static_cast<std::uint32_t>(frame),
                                static_cast<std::uint32_t>(frame >> 32) ^
                                    (static_cast<std::uint32_t>(pixel >> 32) << 16),
                                stream};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed),
                            static_cast<std::uint32_t>(seed >> 32)};
  const auto r = Philox4x32::generate(ctr, key);
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const std::uint64_t a = (std::uint64_t{r[0]} << 32 | r[1]) >> 11;
  const std::uint64_t b = (std::uint64_t{r[2]} << 32 | r[3]) >> 11;
  return {static_cast<double>(a) * kScale, static_cast<double>(b) * kScale};
}

}  // namespace qld
