#pragma once

#include <cstdint>

namespace qdemon {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

// SplitMix64 stream addressed by (seed, stream index). Streams with distinct
// indices are statistically independent, so a run loop can draw from stream i
// for run i and execute in any order, or across threads, without changing
// its output.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : state_(detail::mix64(detail::mix64(seed + detail::kGolden) ^
                             detail::mix64(stream + 0x7F4A7C159E3779B9ull))) {}

  std::uint64_t next_u64() {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1); safe to feed through an inverse CDF.
  double next_uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Fixed splitting rule turning one master seed into independent child seeds
// (per sweep point, per repetition, per output stage). Documented in the
// README so experiments can be reproduced piecemeal.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose) {
  return RandomStream(master, purpose).next_u64();
}

// Stream indices at or above this value are reserved for draws that are not
// tied to a run index (e.g. the pre-settled setting list).
inline constexpr std::uint64_t kAuxStreamBase = 0x8000000000000000ull;

// floor(u * n) clamped into [0, n); maps a uniform sample to an index.
inline int uniform_index(double u, int n) {
  int k = static_cast<int>(u * n);
  if (k < 0) k = 0;
  if (k >= n) k = n - 1;
  return k;
}

}  // namespace qdemon
