#pragma once

#include <cstdint>

#include "gnisim/normal.hpp"

namespace gnisim {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

/// Counter-based generator: the i-th output is a pure function of
/// (seed, stream, i), so disjoint streams can run on any thread layout
/// and still reproduce bit-for-bit.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive_key(seed, stream)) {}

  std::uint64_t next_u64() { return at(counter_++); }

  /// Random access without disturbing the sequential counter.
  std::uint64_t at(std::uint64_t i) const {
    return detail::mix64(key_ + i * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform in (0,1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by inverse transform (shares the quantile code used
  /// elsewhere, and keeps the stream one-draw-per-variate).
  double next_normal() { return normal_inv(next_uniform()); }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return detail::mix64(seed + 0x632be59bd9b4e019ULL) ^
           detail::mix64(stream * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stable sub-stream ids: hash a (seed, tag, index) triple into a fresh stream.
inline std::uint64_t substream(std::uint64_t stream, std::uint64_t tag, std::uint64_t index = 0) {
  return detail::mix64(stream ^ detail::mix64(tag + 0x9e3779b97f4a7c15ULL)) + index;
}

}  // namespace gnisim
