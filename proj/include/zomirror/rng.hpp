#pragma once

#include <cstdint>
#include <string_view>

namespace zomirror {

/// SplitMix64 output mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
  z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
  return z ^ (z >> 31);
}

/// FNV-1a, used to fold string tags into stream keys.
constexpr std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = UINT64_C(0xcbf29ce484222325);
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= UINT64_C(0x100000001b3);
  }
  return h;
}

/// Counter-based random stream. Output i is mix64(key + (i+1) * golden), so a
/// stream is fully determined by its key and position; child streams are
/// derived by hashing an index into the key. Streams for different
/// (seed, iteration, batch element) never share state, which keeps batch
/// estimates reproducible regardless of evaluation order.
class RngStream {
 public:
  explicit constexpr RngStream(std::uint64_t seed) : key_(mix64(seed ^ kSeedSalt)) {}

  constexpr RngStream split(std::uint64_t index) const {
    return RngStream(Raw{}, mix64(key_ ^ mix64(index + kSplitSalt)));
  }

  constexpr std::uint64_t key() const { return key_; }

  constexpr std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n > 0, by rejection.
  std::uint64_t next_below(std::uint64_t n);

  /// Standard normal via Box-Muller (one value per call, second discarded).
  double next_normal();

 private:
  struct Raw {};
  constexpr RngStream(Raw, std::uint64_t key) : key_(key) {}

  static constexpr std::uint64_t kGolden = UINT64_C(0x9E3779B97F4A7C15);
  static constexpr std::uint64_t kSeedSalt = UINT64_C(0x5A0E1C3B2D4F6071);
  static constexpr std::uint64_t kSplitSalt = UINT64_C(0xD1B54A32D192ED03);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace zomirror
