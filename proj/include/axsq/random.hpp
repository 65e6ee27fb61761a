#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace axsq {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by (seed, stream_id); the block counter walks
/// forward inside the stream. Two streams with different ids never overlap,
/// so per-trajectory streams give the same numbers whether trajectories run
/// serially or on separate threads.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using block_type = std::array<std::uint32_t, 4>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_{static_cast<std::uint32_t>(stream_id),
                static_cast<std::uint32_t>(stream_id >> 32)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (index_ == 4) {
      buffer_ = generate_block(block_++);
      index_ = 0;
    }
    return buffer_[index_++];
  }

  /// Raw bijection: one 128-bit counter block under a 64-bit key.
  static block_type bijection(block_type ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  block_type generate_block(std::uint64_t block) const {
    return bijection({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                      stream_[0], stream_[1]},
                     key_);
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> stream_;
  std::uint64_t block_ = 0;
  block_type buffer_{};
  int index_ = 4;
};

/// Uniform and standard-normal variates on top of a Philox stream.
///
/// Box-Muller is used instead of std::normal_distribution so that output is
/// identical across standard library implementations.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream_id) : engine_(seed, stream_id) {}

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform() {
    const std::uint64_t hi = engine_() >> 6;  // 26 bits
    const std::uint64_t lo = engine_() >> 5;  // 27 bits
    const std::uint64_t bits = (hi << 27) | lo;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  Philox4x32 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace axsq
