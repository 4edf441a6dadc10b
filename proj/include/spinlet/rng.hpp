#ifndef SPINLET_RNG_HPP
#define SPINLET_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace spinlet {

// Philox-4x32-10 counter-based generator.  Every output block is a pure
// function of (key, counter), so any (l, m, replicate) substream can be
// sampled independently of evaluation order and of the requested bandlimit.
class Philox4x32 {
public:
  explicit Philox4x32(std::uint64_t key)
      : k0_(static_cast<std::uint32_t>(key)), k1_(static_cast<std::uint32_t>(key >> 32)) {}

  std::array<std::uint32_t, 4> operator()(std::array<std::uint32_t, 4> ctr) const {
    std::uint32_t k0 = k0_, k1 = k1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ULL * ctr[0];
      const std::uint64_t p1 = 0xCD9E8D57ULL * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0, static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1, static_cast<std::uint32_t>(p0)};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return ctr;
  }

private:
  std::uint32_t k0_;
  std::uint32_t k1_;
};

// Standard normal draws addressed by a 96-bit substream id; consecutive
// next() calls walk the substream's block counter.  Box-Muller on uniforms
// mapped into (0, 1].
class GaussianStream {
public:
  GaussianStream(const Philox4x32& rng, std::uint32_t id0, std::uint32_t id1, std::uint32_t id2)
      : rng_(&rng), ctr_{id0, id1, id2, 0} {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const auto blk = (*rng_)(ctr_);
    ++ctr_[3];
    const double u1 = to_unit((static_cast<std::uint64_t>(blk[0]) << 32) | blk[1]);
    const double u2 = to_unit((static_cast<std::uint64_t>(blk[2]) << 32) | blk[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

private:
  static double to_unit(std::uint64_t v) {
    // 53 significant bits, shifted into (0, 1] so the logarithm is finite.
    return static_cast<double>((v >> 11) + 1) * 0x1.0p-53;
  }

  const Philox4x32* rng_;
  std::array<std::uint32_t, 4> ctr_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace spinlet

#endif
