#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace stochper {

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Stream tags keep independent uses of one (seed, path) pair apart.
enum class StreamTag : std::uint32_t { Noise = 0, Initial = 1, Resample = 2, Projection = 3, Pairs = 4 };

/// Standard normals addressed by (seed, path, tag, index). Any draw can be
/// recomputed from its address alone, so results do not depend on how paths
/// are distributed over threads.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t path, StreamTag tag)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_(path),
        tag_(static_cast<std::uint32_t>(tag)) {}

  /// Next standard normal (Box-Muller on one Philox block, two normals per block).
  double next() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    const auto block = philox4x32(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32) ^ (tag_ << 24)},
        key_);
    ++block_;
    const double u1 = to_open_unit(block[0], block[1]);
    const double u2 = to_open_unit(block[2], block[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(kTwoPi * u2);
    cached_ = true;
    return r * std::cos(kTwoPi * u2);
  }

  /// Uniform on (0, 1), 53 bits.
  double uniform() {
    cached_ = false;
    const auto block = philox4x32(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32) ^ (tag_ << 24)},
        key_);
    ++block_;
    return to_open_unit(block[0], block[1]);
  }

  /// Uniform index in [0, n).
  std::uint64_t index(std::uint64_t n) {
    const auto i = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  /// Jumps to block `index`; draws restart from that block.
  void seek(std::uint64_t index) {
    block_ = index;
    cached_ = false;
  }

 private:
  static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t path_;
  std::uint32_t tag_;
  std::uint64_t block_ = 0;
  bool cached_ = false;
  double spare_ = 0.0;
};

}  // namespace stochper
