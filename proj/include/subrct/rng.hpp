#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace subrct {

// Philox 4x32-10 counter-based generator. Each (key, counter) pair maps to an
// independent 128-bit random block, so streams can be carved out of the
// counter space and evaluated in any order, on any thread, with identical
// results. This is what makes multi-threaded simulation runs reproducible.
namespace philox {

inline constexpr uint32_t kM0 = 0xD2511F53;
inline constexpr uint32_t kM1 = 0xCD9E8D57;
inline constexpr uint32_t kW0 = 0x9E3779B9;
inline constexpr uint32_t kW1 = 0xBB67AE85;

inline void multiply_high_low(uint32_t a, uint32_t b, uint32_t* lo, uint32_t* hi) {
  uint64_t p = static_cast<uint64_t>(a) * b;
  *lo = static_cast<uint32_t>(p);
  *hi = static_cast<uint32_t>(p >> 32);
}

inline std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                     std::array<uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    uint32_t lo0, hi0, lo1, hi1;
    multiply_high_low(kM0, ctr[0], &lo0, &hi0);
    multiply_high_low(kM1, ctr[2], &lo1, &hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

}  // namespace philox

// A single logical random stream: a fixed (seed, draw, purpose, rep) prefix
// with a running block counter. Yields uniforms, normals and bounded ints.
class RngStream {
 public:
  RngStream(uint64_t seed, uint32_t draw, uint32_t purpose, uint32_t rep)
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
        prefix_{0, purpose, rep, draw} {}

  uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  uint64_t next_u64() {
    uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on the open interval (0, 1); never returns an exact endpoint so
  // log() in the normal transform is always finite.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // Unbiased integer in [0, bound) via rejection.
  uint32_t uniform_below(uint32_t bound) {
    uint32_t threshold = (0u - bound) % bound;
    for (;;) {
      uint64_t m = static_cast<uint64_t>(next_u32()) * bound;
      if (static_cast<uint32_t>(m) >= threshold) return static_cast<uint32_t>(m >> 32);
    }
  }

 private:
  void refill() {
    buf_ = philox::block(prefix_, key_);
    ++prefix_[0];
    pos_ = 0;
  }

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 4> prefix_;
  std::array<uint32_t, 4> buf_{};
  int pos_ = 4;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace subrct
