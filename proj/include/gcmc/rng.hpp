#pragma once

#include <cstdint>

namespace gcmc {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based SplitMix64 stream.
///
/// Draw n of a stream is mix64(key + n * 0x9e3779b97f4a7c15) with
/// n = 1, 2, ...; this is exactly the SplitMix64 sequence started at `key`.
/// The key is derived from (seed, stream, substream), so every replica and
/// every product factor gets its own reproducible stream without any shared
/// state.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0) noexcept
      : key_(mix64(mix64(seed) ^ mix64(stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL) ^
                   mix64(substream * 0xa0761d6478bd642fULL + 0xe7037ed1a0b428dbULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept { return mix64(key_ + (++counter_) * kGamma); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace gcmc
